from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='RunRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(choices=[('poc', 'Analytic POC'), ('oracle', 'Monte-Carlo oracle'), ('scenario', 'POC scenario'), ('bench', 'Runtime benchmark'), ('accuracy', 'Accuracy study'), ('smpc', 'SMPC run'), ('overtaking', 'Overtaking comparison')], help_text='Engine command that produced the run', max_length=20)),
                ('status', models.CharField(choices=[('SUCCESS', 'Success'), ('INFEASIBLE', 'Completed with infeasible steps'), ('FAILED', 'Failed')], default='SUCCESS', help_text='Outcome of the run', max_length=20)),
                ('seed', models.BigIntegerField(blank=True, help_text='Random seed used by sampling-based steps', null=True)),
                ('schema_version', models.CharField(help_text='Version of the output schema', max_length=10)),
                ('config', models.JSONField(default=dict, help_text='Fully resolved command configuration')),
                ('outputs', models.JSONField(blank=True, default=list, help_text='Paths of the files written by the run')),
                ('versions', models.JSONField(default=dict, help_text='Versions of the packages the run depended on')),
                ('summary', models.JSONField(blank=True, default=dict, help_text='Headline results of the run')),
                ('wall_clock_s', models.FloatField(help_text='Wall-clock duration in seconds')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'db_table': 'run_records',
                'ordering': ['-created_at'],
                'indexes': [
                    models.Index(fields=['command', 'status'], name='run_command_status_idx'),
                    models.Index(fields=['created_at'], name='run_created_at_idx'),
                ],
            },
        ),
    ]
