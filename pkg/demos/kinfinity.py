"""Area-to-volume ratio of growing balls on each model.

The ratio tends to a positive constant on hyperbolic space and to zero on
flat space; on the sphere the scan stops short of the cut locus.

    python demos/kinfinity.py
"""

from horolab import catalog, identities

for name, radii in (
    ("euclidean2", [2.0, 4.0, 8.0, 16.0, 32.0, 64.0]),
    ("hyperboloid2", [4.0, 8.0, 12.0, 16.0]),
    ("hyperboloid3", [4.0, 8.0, 12.0, 16.0]),
    ("sphere2", [0.5, 1.0, 2.0, 3.0]),
):
    m = catalog.get_manifold(name)
    scan = identities.kinfinity_scan(m, catalog.base_point(m), radii)
    ratios = ", ".join(f"{x:.4f}" for x in scan.ratios)
    print(f"{name:<13} {scan.classification:<16} trend={scan.trend:<10} ratios=[{ratios}]")
    if scan.domain_limited:
        print(f"{'':<13} (limited by the injectivity radius {m.injectivity_bound(None):.4f})")
print("\nflat ratios halve with r; hyperbolic ones settle at dim - 1.")
