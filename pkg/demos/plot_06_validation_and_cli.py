"""
Validating against pollution and venues, end to end
===================================================

Write the synthetic city to disk, drive the whole pipeline through the
command-line entry point and check that emission fractions track NO2.
"""
import csv
import tempfile
from pathlib import Path

from smellscape.cli import main
from smellscape.synth import planted_city, write_inputs

work = Path(tempfile.mkdtemp())
city = planted_city(n_segments=300, n_records=30_000, seed=6)
paths = write_inputs(city.dataset, work / "in")

main(["ingest", "--records", str(paths["records"]), "--streets", str(paths["streets"]),
      "--pollutants", str(paths["pollutants"]), "--venues", str(paths["venues"]),
      "--out", str(work / "ds.bin")])
main(["map", "--dataset", str(work / "ds.bin"), "--out", str(work / "t.npz"), "--workers", "2"])
main(["validate", "pollution", "--tallies", str(work / "t.npz"), "--dataset", str(work / "ds.bin"),
      "--sweep", "30", "--out", str(work / "pollution.csv")])
main(["export", "--tallies", str(work / "t.npz"), "--dataset", str(work / "ds.bin"),
      "--layer", "smell:nature", "--out", str(work / "nature.geojson")])

###############################################################################
# Fractions, not raw counts, are what should follow the pollutant.
with open(work / "pollution.csv") as fh:
    rows = [r for r in csv.DictReader(line for line in fh if not line.startswith("#"))]
for r in rows:
    if r["category"] == "emissions" and r["pollutant"] == "no2":
        print(r["method"], r["spearman"])
print("outputs in", work)
