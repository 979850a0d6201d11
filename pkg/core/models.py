from django.db import models


class RunRecord(models.Model):
    """
    Persisted run manifest of one engine command.
    Stores everything needed to reproduce the run's outputs.
    """

    class Command(models.TextChoices):
        POC = 'poc', 'Analytic POC'
        ORACLE = 'oracle', 'Monte-Carlo oracle'
        SCENARIO = 'scenario', 'POC scenario'
        BENCH = 'bench', 'Runtime benchmark'
        ACCURACY = 'accuracy', 'Accuracy study'
        SMPC = 'smpc', 'SMPC run'
        OVERTAKING = 'overtaking', 'Overtaking comparison'

    class RunStatus(models.TextChoices):
        SUCCESS = 'SUCCESS', 'Success'
        INFEASIBLE = 'INFEASIBLE', 'Completed with infeasible steps'
        FAILED = 'FAILED', 'Failed'

    command = models.CharField(
        max_length=20,
        choices=Command.choices,
        help_text='Engine command that produced the run'
    )
    status = models.CharField(
        max_length=20,
        choices=RunStatus.choices,
        default=RunStatus.SUCCESS,
        help_text='Outcome of the run'
    )
    seed = models.BigIntegerField(
        null=True,
        blank=True,
        help_text='Random seed used by sampling-based steps'
    )
    schema_version = models.CharField(
        max_length=10,
        help_text='Version of the output schema'
    )
    config = models.JSONField(
        default=dict,
        help_text='Fully resolved command configuration'
    )
    outputs = models.JSONField(
        default=list,
        blank=True,
        help_text='Paths of the files written by the run'
    )
    versions = models.JSONField(
        default=dict,
        help_text='Versions of the packages the run depended on'
    )
    summary = models.JSONField(
        default=dict,
        blank=True,
        help_text='Headline results of the run'
    )
    wall_clock_s = models.FloatField(
        help_text='Wall-clock duration in seconds'
    )
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        db_table = 'run_records'
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['command', 'status'], name='run_command_status_idx'),
            models.Index(fields=['created_at'], name='run_created_at_idx'),
        ]

    def __str__(self):
        return f"{self.get_command_display()} #{self.pk} ({self.get_status_display()})"

    @property
    def succeeded(self):
        """Check if the run finished without infeasible steps"""
        return self.status == self.RunStatus.SUCCESS

    @classmethod
    def from_manifest(cls, manifest):
        """Create a record from a ``RunManifest``"""
        return cls.objects.create(
            command=manifest.command,
            status=manifest.status,
            seed=manifest.seed,
            schema_version=manifest.schema_version,
            config=manifest.config,
            outputs=manifest.outputs,
            versions=manifest.versions,
            summary=manifest.summary,
            wall_clock_s=manifest.wall_clock_s,
        )
