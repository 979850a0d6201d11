from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='IntervalCache',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('ego_length', models.FloatField(help_text='Ego footprint length (m)')),
                ('ego_width', models.FloatField(help_text='Ego footprint width (m)')),
                ('obj_length', models.FloatField(help_text='Object footprint length (m)')),
                ('obj_width', models.FloatField(help_text='Object footprint width (m)')),
                ('ego_circles', models.PositiveSmallIntegerField(help_text='Circles covering the ego')),
                ('obj_circles', models.PositiveSmallIntegerField(help_text='Circles covering the object')),
                ('n_samples', models.PositiveIntegerField(help_text='Grid samples per polar axis')),
                ('payload', models.JSONField(help_text='Padded interval arrays, counts and full flags')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'db_table': 'interval_cache',
                'ordering': ['-created_at'],
                'constraints': [
                    models.UniqueConstraint(
                        fields=(
                            'ego_length', 'ego_width', 'obj_length', 'obj_width',
                            'ego_circles', 'obj_circles', 'n_samples',
                        ),
                        name='unique_interval_cache_key',
                    ),
                ],
            },
        ),
    ]
