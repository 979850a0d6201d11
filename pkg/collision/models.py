from django.db import models


class IntervalCache(models.Model):
    """
    Serialized disjoint heading intervals of one estimator configuration.
    The intervals depend only on the footprints, circle counts and grid size.
    """

    ego_length = models.FloatField(help_text='Ego footprint length (m)')
    ego_width = models.FloatField(help_text='Ego footprint width (m)')
    obj_length = models.FloatField(help_text='Object footprint length (m)')
    obj_width = models.FloatField(help_text='Object footprint width (m)')
    ego_circles = models.PositiveSmallIntegerField(help_text='Circles covering the ego')
    obj_circles = models.PositiveSmallIntegerField(help_text='Circles covering the object')
    n_samples = models.PositiveIntegerField(help_text='Grid samples per polar axis')
    payload = models.JSONField(help_text='Padded interval arrays, counts and full flags')
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        db_table = 'interval_cache'
        ordering = ['-created_at']
        constraints = [
            models.UniqueConstraint(
                fields=[
                    'ego_length', 'ego_width', 'obj_length', 'obj_width',
                    'ego_circles', 'obj_circles', 'n_samples',
                ],
                name='unique_interval_cache_key',
            ),
        ]

    def __str__(self):
        return (
            f"{self.ego_length:g}x{self.ego_width:g} vs {self.obj_length:g}x{self.obj_width:g} "
            f"({self.ego_circles},{self.obj_circles}) N_s={self.n_samples}"
        )

    @staticmethod
    def key_for(ego_fp, obj_fp, n_ego, n_obj, n_samples):
        """Lookup fields for a cache entry"""
        return {
            'ego_length': ego_fp.length,
            'ego_width': ego_fp.width,
            'obj_length': obj_fp.length,
            'obj_width': obj_fp.width,
            'ego_circles': n_ego,
            'obj_circles': n_obj,
            'n_samples': n_samples,
        }
