"""Run orchestration: the staged pipeline and the background job queue."""
