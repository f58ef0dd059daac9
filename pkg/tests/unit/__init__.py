"""Unit tests for GraphLeaf."""
