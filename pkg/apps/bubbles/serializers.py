from rest_framework import serializers


class AnalyzeRequestSerializer(serializers.Serializer):
    slices = serializers.CharField()
    eps1 = serializers.FloatField()
    max_depth = serializers.IntegerField(min_value=1, required=False)

    def validate_eps1(self, value):
        if not value > 0:
            raise serializers.ValidationError("eps1 must be positive.")
        return value
