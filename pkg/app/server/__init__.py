"""HTTP front end for queued pipeline runs."""
