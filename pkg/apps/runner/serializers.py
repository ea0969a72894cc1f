from rest_framework import serializers


class ScenarioSerializer(serializers.Serializer):
    name = serializers.CharField()
    description = serializers.CharField()
    expected = serializers.CharField()
    target = serializers.CharField(allow_null=True)


class RunSummarySerializer(serializers.Serializer):
    status = serializers.IntegerField()
    output_dir = serializers.CharField()
    rounds = serializers.IntegerField(min_value=0)
    initial_max_energy = serializers.FloatField()
    final_max_energy = serializers.FloatField()
    final_gap = serializers.FloatField()
    verdict = serializers.CharField()

    def validate(self, attrs):
        if attrs["final_max_energy"] > attrs["initial_max_energy"] * (1.0 + 1e-12) + 1e-12:
            raise serializers.ValidationError("Max energy grew over the run.")
        return attrs
