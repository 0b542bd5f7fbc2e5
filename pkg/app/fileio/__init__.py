"""Readers and writers for meshes, clouds, skeletons, index lists and reports."""
