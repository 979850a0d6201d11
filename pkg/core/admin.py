from django.contrib import admin

from .models import RunRecord


@admin.register(RunRecord)
class RunRecordAdmin(admin.ModelAdmin):
    """
    Admin interface for stored run manifests
    """
    list_display = ('id', 'command', 'status', 'seed', 'wall_clock_s', 'created_at')
    list_filter = ('command', 'status', 'created_at')
    search_fields = ('command', 'schema_version')
    ordering = ('-created_at',)
    readonly_fields = (
        'command', 'status', 'seed', 'schema_version', 'config', 'outputs',
        'versions', 'summary', 'wall_clock_s', 'created_at',
    )

    fieldsets = (
        ('Run', {
            'fields': ('command', 'status', 'seed', 'wall_clock_s', 'created_at')
        }),
        ('Manifest', {
            'fields': ('schema_version', 'config', 'outputs', 'versions', 'summary'),
            'classes': ('collapse',)
        }),
    )

    def has_add_permission(self, request):
        return False
