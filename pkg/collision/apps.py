from django.apps import AppConfig


class CollisionConfig(AppConfig):
    name = 'collision'
    verbose_name = 'Collision probability'
