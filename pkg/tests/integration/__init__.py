"""Integration tests for GraphLeaf."""
