"""Convert the transformed WISDM ARFF file to user,class,features CSV.

Columns holding any missing value are dropped, as is the row id.
"""
import csv
import sys


def main(src, dst):
    names, rows, in_data = [], [], False
    with open(src, encoding="utf-8", errors="replace") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("%"):
                continue
            low = line.lower()
            if low.startswith("@attribute"):
                names.append(line.split()[1].strip('"'))
            elif low.startswith("@data"):
                in_data = True
            elif in_data:
                rows.append([v.strip().strip('"') for v in line.split(",")])
    rows = [r for r in rows if len(r) == len(names)]
    user, label = names.index("user"), names.index("class")
    skip = {user, label, names.index("UNIQUE_ID")}
    keep = [i for i in range(len(names)) if i not in skip and all(r[i] != "?" for r in rows)]
    with open(dst, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["user", "class"] + [names[i] for i in keep])
        for r in rows:
            w.writerow([r[user], r[label]] + [r[i] for i in keep])
    print(f"{len(rows)} rows, {len(keep)} features -> {dst}", file=sys.stderr)


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
