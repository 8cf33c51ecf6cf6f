"""Helper process for the durability test: writes acknowledged data, prints
what it wrote as one JSON line, then spins until the parent kills it dead.

Usage: python crash_writer.py <data_dir>
"""

import json
import sys
import time

from planttalk.model import Reading
from planttalk.store import TelemetryStore


def main() -> None:
    data_dir = sys.argv[1]
    store = TelemetryStore(data_dir, durability="strict")

    acked = {"readings": [], "docs": {}, "session": None}
    for i in range(100):
        reading = Reading("crash-ch", 1000 + i, float(i % 100), 20.0 + i % 10, 50.0)
        seq = store.append("crash-ch", reading)
        acked["readings"].append({**reading.row(), "seq": seq})

    for i in range(10):
        doc = {"plant_id": f"doc-{i}", "nickname": f"plant {i}", "index": i}
        store.put_doc("plants", f"doc-{i}", doc)
        acked["docs"][f"doc-{i}"] = doc

    session = {
        "plant_id": "doc-0",
        "turns": [
            {"role": "user", "text": "Hey how are you doing today?", "ts": 1100},
            {"role": "plant", "text": "I'm feeling a bit thirsty today, could you water me?", "ts": 1100},
        ],
    }
    store.put_doc("sessions", "doc-0", session)
    acked["session"] = session

    sys.stdout.write(json.dumps(acked) + "\n")
    sys.stdout.flush()
    while True:  # no shutdown hooks run; the parent SIGKILLs us here
        time.sleep(1)


if __name__ == "__main__":
    main()
