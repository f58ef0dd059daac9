"""Test package for GraphLeaf."""
