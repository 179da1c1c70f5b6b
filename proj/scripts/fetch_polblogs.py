#!/usr/bin/env python3
"""Fetch the political-blogs network and convert it to the formats the
experiment harness reads.

Writes data/polblogs_edges.txt (whitespace edge list, 0-based) and
data/polblogs_labels.csv (node,label with liberal=1, conservative=2).
The raw file is the GML distribution of the Adamic-Glance snapshot; pass
--gml to convert an already-downloaded copy instead of fetching.
"""

import argparse
import pathlib
import re
import sys
import urllib.request

SOURCES = [
    "https://websites.umich.edu/~mejn/netdata/polblogs.zip",
    "http://www-personal.umich.edu/~mejn/netdata/polblogs.zip",
]


def fetch_gml(out_dir: pathlib.Path) -> str:
    import io
    import zipfile

    last_error = None
    for url in SOURCES:
        try:
            print(f"fetching {url}")
            with urllib.request.urlopen(url, timeout=60) as response:
                payload = response.read()
            with zipfile.ZipFile(io.BytesIO(payload)) as archive:
                for name in archive.namelist():
                    if name.endswith(".gml"):
                        return archive.read(name).decode("latin-1")
            raise RuntimeError(f"no .gml member in {url}")
        except Exception as error:  # noqa: BLE001 - report and try the mirror
            last_error = error
            print(f"  failed: {error}", file=sys.stderr)
    raise SystemExit(f"could not download the dataset: {last_error}")


def parse_gml(text: str):
    """Minimal GML reader for the node/edge schema of this dataset."""
    nodes = []  # (id, value)
    edges = []  # (source, target)
    block = None
    fields = {}
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("node"):
            block, fields = "node", {}
        elif line.startswith("edge"):
            block, fields = "edge", {}
        elif line.startswith("]"):
            if block == "node" and "id" in fields:
                nodes.append((int(fields["id"]), int(fields.get("value", 0))))
            elif block == "edge" and "source" in fields:
                edges.append((int(fields["source"]), int(fields["target"])))
            block = None
        elif block:
            match = re.match(r"(\w+)\s+(.+)", line)
            if match:
                fields[match.group(1)] = match.group(2).strip('"')
    return nodes, edges


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--gml", help="convert a local polblogs.gml instead of downloading")
    parser.add_argument("--out", default="data", help="output directory (default: data)")
    args = parser.parse_args()

    out_dir = pathlib.Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.gml:
        text = pathlib.Path(args.gml).read_text(encoding="latin-1")
    else:
        text = fetch_gml(out_dir)

    nodes, edges = parse_gml(text)
    if not nodes or not edges:
        raise SystemExit("parsed no nodes or edges; is this the right GML file?")
    index = {node_id: i for i, (node_id, _) in enumerate(nodes)}

    edges_path = out_dir / "polblogs_edges.txt"
    with edges_path.open("w") as out:
        for source, target in edges:
            out.write(f"{index[source]} {index[target]}\n")

    labels_path = out_dir / "polblogs_labels.csv"
    with labels_path.open("w") as out:
        out.write("node,label\n")
        for node_id, value in nodes:
            out.write(f"{index[node_id]},{value + 1}\n")

    print(f"wrote {edges_path} ({len(edges)} directed edges, symmetrized on load)")
    print(f"wrote {labels_path} ({len(nodes)} nodes)")


if __name__ == "__main__":
    main()
