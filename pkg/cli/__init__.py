"""Command entry points for the shortck toolkit."""
