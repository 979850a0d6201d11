from rest_framework import serializers

from .models import RunRecord


class RunRecordSerializer(serializers.ModelSerializer):
    """
    Serializer for stored run manifests
    """
    succeeded = serializers.BooleanField(read_only=True)

    class Meta:
        model = RunRecord
        fields = (
            'id', 'command', 'status', 'succeeded', 'seed', 'schema_version',
            'config', 'outputs', 'versions', 'summary', 'wall_clock_s', 'created_at',
        )
        read_only_fields = fields


class RunRecordListSerializer(serializers.ModelSerializer):
    """
    Lightweight serializer for the run listing
    """
    command_display = serializers.CharField(source='get_command_display', read_only=True)

    class Meta:
        model = RunRecord
        fields = ('id', 'command', 'command_display', 'status', 'seed', 'wall_clock_s', 'created_at')
        read_only_fields = fields
