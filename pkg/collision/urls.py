from django.urls import path

from .views import OracleView, PocEstimateView

app_name = 'collision'

urlpatterns = [
    path('poc/estimate/', PocEstimateView.as_view(), name='poc-estimate'),
    path('poc/oracle/', OracleView.as_view(), name='poc-oracle'),
]
