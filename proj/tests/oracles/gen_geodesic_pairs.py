"""Freeze reference geodesic distances for the Vincenty tests.

Uses Karney's algorithm (geographiclib), an implementation independent of
the Vincenty iteration under test.  Run once; output is checked in.

    python3 tests/oracles/gen_geodesic_pairs.py > tests/data/geodesic_pairs.csv
"""
import random

from geographiclib.geodesic import Geodesic

geod = Geodesic.WGS84
rng = random.Random(20240521)
print("lat1,lon1,lat2,lon2,s12")
for _ in range(1000):
    lat1 = rng.uniform(-85.0, 85.0)
    lon1 = rng.uniform(-179.9, 180.0)
    azi = rng.uniform(-180.0, 180.0)
    dist = 10000.0 * rng.random() ** 2  # bias towards short hops
    d = geod.Direct(lat1, lon1, azi, dist)
    lat2, lon2 = d["lat2"], d["lon2"]
    s12 = geod.Inverse(lat1, lon1, lat2, lon2)["s12"]
    print(f"{lat1:.17g},{lon1:.17g},{lat2:.17g},{lon2:.17g},{s12:.17g}")
