"""Drive the batch front end: fixtures, deterministic reports, a sweep.

Everything runs through irrevkit.cli.main with an explicit argv, exactly
as the `irrevkit` console script would; reports are byte-stable and
timestamps live in a sidecar so reruns diff clean.
"""

import json
import tempfile
from pathlib import Path

from irrevkit.cli import main as cli_main


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        fixtures = root / "fixtures"
        code = cli_main(["fixtures", "--dir", str(fixtures)])
        names = sorted(p.name for p in fixtures.glob("*.json"))
        print(f"fixtures ({code=}): {len(names)} scenarios")
        for name in names:
            print(f"  {name}")
        print()

        scenario = fixtures / "otoc-ising-chain.json"
        code = cli_main(["run", str(scenario)])
        report_path = scenario.with_suffix(".report.json")
        report = json.loads(report_path.read_text())
        print(f"run ({code=}): {report['kind']}")
        print(f"  direct {report['result']['direct']:.12f}")
        print(f"  protocol {report['result']['iep']['value']:.12f}")
        print(f"  gap {report['result']['gap']:.1e}")

        first = report_path.read_bytes()
        cli_main(["run", str(scenario)])
        print(f"  rerun byte-identical: {report_path.read_bytes() == first}")
        print()

        csv_path = root / "chain_sweep.csv"
        code = cli_main(
            [
                "sweep",
                str(scenario),
                "--parameter",
                "tau",
                "--grid",
                "0.0,0.5,1.0",
                "--output",
                str(csv_path),
            ]
        )
        print(f"sweep ({code=}):")
        print(csv_path.read_text().strip())


if __name__ == "__main__":
    main()
