"""Skeleton model, ball connection and reconstruction error."""
