"""Follow one tainted value from a web handler to a shell command.

Run with ``python3 demos/taint_walkthrough.py``.
"""

from __future__ import annotations

import os
import tempfile

from uast_taint.analyzer import run
from uast_taint.report import emit_text

PROGRAM = '''\
import os
import flaskish
app = flaskish.Flask("demo")

def quote(s):
    return "'" + s + "'"

@app.route("/ping")
def ping(host):
    cmd = f"ping -c 1 {host}"
    os.system(cmd)
    os.system("ping " + quote(sanitize(host)))
'''


def main() -> None:
    with tempfile.TemporaryDirectory() as root:
        with open(os.path.join(root, "app.mpy"), "w", encoding="utf-8") as fh:
            fh.write(PROGRAM)
        report = run(root)
        print(f"entry points: {report.entry_points}")
        print()
        # The handler parameter is seeded as a source. The f-string is lowered
        # to string concatenation, so the taint survives into cmd; the second
        # call goes through the sanitizer and is not reported.
        print(emit_text(report))


if __name__ == "__main__":
    main()
