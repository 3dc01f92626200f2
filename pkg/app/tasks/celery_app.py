from celery import Celery

from ..core.config import settings

# One task per sampled schedule; results go back through the same Redis instance
celery_app = Celery(
    "ar2_sample_worker",
    broker=settings.REDIS_URL,
    backend=settings.REDIS_URL,
    include=["app.tasks.sample_tasks"],
)

# JSON only: tasks take plain numbers and return SampleResult dicts.
# Samples are CPU-bound and short, so each worker process takes one at a time.
celery_app.conf.update(
    task_serializer="json",
    accept_content=["json"],
    result_serializer="json",
    timezone="UTC",
    enable_utc=True,
    task_soft_time_limit=settings.SAMPLE_TASK_SOFT_TIME_LIMIT,
    task_time_limit=settings.SAMPLE_TASK_TIME_LIMIT,
    worker_prefetch_multiplier=1,
)

if __name__ == "__main__":
    celery_app.start()
