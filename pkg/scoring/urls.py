from django.urls import path

from .views import ScoreView

app_name = "scoring"

urlpatterns = [
    path("score", ScoreView.as_view(), name="score"),
]
