"""Unit-box geometry, spatial queries and the regular triangulation."""
