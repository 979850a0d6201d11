"""
URL configuration for the collision-probability engine.

The management commands are the primary interface; the API exposes the same
estimators for other services and lists stored run manifests.
"""
from django.contrib import admin
from django.urls import path, include, re_path
from django.views.generic import RedirectView
from rest_framework import permissions
from drf_yasg.views import get_schema_view
from drf_yasg import openapi

api_patterns = [
    path('api/', include('collision.urls')),
    path('api/', include('core.urls')),
]

# Swagger/OpenAPI Schema Configuration
schema_view = get_schema_view(
    openapi.Info(
        title="Collision Probability Engine API",
        default_version='v1',
        description="""
        # Collision Probability Engine API

        Probability of collision (POC) between two rectangular vehicles whose
        relative pose is Gaussian, computed by covering each rectangle with
        circles and integrating over precomputed polar intervals.

        ## API Organization

        - **POC**: Analytic estimate and Monte-Carlo oracle for one belief
        - **Runs**: Manifests stored by commands run with `--record`

        ## Quick Start

        1. Estimate: `POST /api/poc/estimate/` with footprints, circle counts and a belief
        2. Compare: `POST /api/poc/oracle/` with the same belief and a seed
        3. Browse runs: `GET /api/runs/?command=smpc`
        """,
        license=openapi.License(name="MIT License"),
    ),
    public=True,
    permission_classes=(permissions.AllowAny,),
    authentication_classes=[],
    patterns=api_patterns,  # Only include API endpoints, exclude Django admin
)

urlpatterns = [
    path('', RedirectView.as_view(pattern_name='schema-swagger-ui', permanent=False)),

    # Admin panel
    path('admin/', admin.site.urls),

    # API endpoints
    *api_patterns,

    # Swagger/OpenAPI Documentation
    re_path(r'^swagger(?P<format>\.json|\.yaml)$',
            schema_view.without_ui(cache_timeout=0),
            name='schema-json'),
    path('swagger/',
         schema_view.with_ui('swagger', cache_timeout=0),
         name='schema-swagger-ui'),
    path('redoc/',
         schema_view.with_ui('redoc', cache_timeout=0),
         name='schema-redoc'),
]
