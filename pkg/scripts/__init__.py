"""Scripts that drive the CLI over the preset scenes."""
