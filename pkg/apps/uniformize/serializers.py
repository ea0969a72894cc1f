from rest_framework import serializers

from core.serializers import PairField


class UniformizeRequestSerializer(serializers.Serializer):
    """Exactly one metric source: a constant (g11, g12, g22) or a PGRID1 file."""

    constant = serializers.ListField(child=serializers.FloatField(), min_length=3, max_length=3, required=False)
    metric = serializers.CharField(required=False)
    grid = serializers.IntegerField(min_value=8)
    delta = serializers.FloatField(min_value=0.0)

    def validate(self, attrs):
        if ("constant" in attrs) == ("metric" in attrs):
            raise serializers.ValidationError("Give exactly one of --constant and --metric.")
        return attrs


class UniformizeReportSerializer(serializers.Serializer):
    tau = PairField()
    reduced_tau = PairField()
    word = serializers.ListField(child=serializers.CharField())
    lambda_mean = serializers.FloatField()
    amplitude = PairField()
    residual = serializers.FloatField(min_value=0.0)
    iterations = serializers.IntegerField(min_value=0)
    conformal_defect = serializers.FloatField()
    inverse_residual = serializers.FloatField(min_value=0.0)
    contraction_rates = serializers.ListField(child=serializers.FloatField())
