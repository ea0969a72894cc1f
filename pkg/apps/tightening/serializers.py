from rest_framework import serializers


class CoveringEntrySerializer(serializers.Serializer):
    balls = serializers.ListField(child=serializers.DictField())
    anchor = serializers.IntegerField(min_value=0)
    core = serializers.ListField(child=serializers.IntegerField(), min_length=2, max_length=2)
    support = serializers.ListField(child=serializers.IntegerField(), min_length=2, max_length=2)
    decrease = serializers.FloatField(min_value=0.0)


class TightenReportSerializer(serializers.Serializer):
    covering = CoveringEntrySerializer(many=True)
    max_active = serializers.IntegerField(min_value=0, max_value=2)
    skipped = serializers.ListField(child=serializers.IntegerField())
    energies_before = serializers.ListField(child=serializers.FloatField())
    energies_after = serializers.ListField(child=serializers.FloatField())
    areas_after = serializers.ListField(child=serializers.FloatField())
    continuity_before = serializers.FloatField()
    continuity_after = serializers.FloatField()
    largest_deformation_step = serializers.FloatField(min_value=0.0)

    def validate(self, attrs):
        if len(attrs["energies_before"]) != len(attrs["energies_after"]):
            raise serializers.ValidationError("Energy lists must have one entry per slice.")
        return attrs
