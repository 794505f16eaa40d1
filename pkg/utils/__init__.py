"""Per-concern engines: basins, potentials, one-variable Julia sets, dimension, conjugacy, discs, scenarios."""
