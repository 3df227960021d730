"""Internal implementation package."""
