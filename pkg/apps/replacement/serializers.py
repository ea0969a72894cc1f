from rest_framework import serializers

from core.serializers import PairField


class BallSerializer(serializers.Serializer):
    center = PairField()
    radius = serializers.FloatField(min_value=0.0)


class ReplaceRequestSerializer(serializers.Serializer):
    slice = serializers.CharField()
    balls = BallSerializer(many=True, allow_empty=False)
    tol = serializers.FloatField()
    eps1 = serializers.FloatField()

    def validate_tol(self, value):
        if not value > 0:
            raise serializers.ValidationError("Tolerance must be positive.")
        return value


class ReplaceReportSerializer(serializers.Serializer):
    balls = BallSerializer(many=True)
    energy_before = serializers.FloatField()
    energy_after = serializers.FloatField()
    ball_energy_before = serializers.FloatField()
    ball_energy_after = serializers.FloatField()
    gap_defect = serializers.FloatField()
    iterations = serializers.IntegerField(min_value=0)
    max_move = serializers.FloatField()
    converged = serializers.BooleanField()
