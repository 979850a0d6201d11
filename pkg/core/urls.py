from django.urls import path

from .views import RunRecordDetailView, RunRecordListView

app_name = 'core'

urlpatterns = [
    path('runs/', RunRecordListView.as_view(), name='run-list'),
    path('runs/<int:pk>/', RunRecordDetailView.as_view(), name='run-detail'),
]
