from django.contrib import admin

from .models import IntervalCache


@admin.register(IntervalCache)
class IntervalCacheAdmin(admin.ModelAdmin):
    """
    Interval cache entries (payload hidden from the list view)
    """
    list_display = (
        'id', 'ego_length', 'ego_width', 'obj_length', 'obj_width',
        'ego_circles', 'obj_circles', 'n_samples', 'created_at',
    )
    list_filter = ('ego_circles', 'obj_circles', 'n_samples')
    ordering = ('-created_at',)
    readonly_fields = ('created_at',)
    exclude = ('payload',)
