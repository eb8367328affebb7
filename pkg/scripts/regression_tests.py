from __future__ import annotations

import argparse
import json
import sys
import tempfile
from pathlib import Path
from typing import Any, Dict, List

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from phgsolve.cli import run  # noqa: E402

PLACEHOLDERS = {
    "{examples}": str(ROOT / "data" / "examples"),
    "{tests}": str(ROOT / "data" / "tests"),
}


def expand(arg: str) -> str:
    for key, value in PLACEHOLDERS.items():
        arg = arg.replace(key, value)
    return arg


def lookup(payload: Any, path: str) -> Any:
    node = payload
    for part in path.split("."):
        node = node[int(part)] if isinstance(node, list) else node[part]
    return node


def check(payload: Any, expect: Dict[str, Any]) -> str:
    """Empty string when the expectation holds, else a reason."""
    try:
        value = lookup(payload, expect["path"])
    except (KeyError, IndexError, ValueError, TypeError):
        return f"missing {expect['path']}"
    if "length" in expect and len(value) != expect["length"]:
        return f"{expect['path']}: length {len(value)} != {expect['length']}"
    if "equals" in expect and value != expect["equals"]:
        return f"{expect['path']}: {value!r} != {expect['equals']!r}"
    if "approx" in expect and abs(float(value) - expect["approx"]) > expect.get("tol", 1e-8):
        return f"{expect['path']}: {value!r} not within {expect.get('tol', 1e-8)} of {expect['approx']}"
    return ""


def run_case(case: Dict[str, Any], workdir: Path) -> Dict[str, Any]:
    out = workdir / "report.json"
    if out.exists():
        out.unlink()
    argv = [expand(a) for a in case["args"]]
    if case.get("exit", 0) == 0:
        argv += ["--out", str(out), "--quiet"]
    status = run(argv)
    reasons: List[str] = []
    if status != case.get("exit", 0):
        reasons.append(f"exit {status} != {case.get('exit', 0)}")
    elif status == 0 and case.get("expect"):
        payload = json.loads(out.read_text(encoding="utf-8"))
        reasons += [r for r in (check(payload, e) for e in case["expect"]) if r]
    return {"name": case["name"], "status": status, "passed": not reasons, "reasons": reasons}


def run_file(path: Path) -> Dict[str, Any]:
    data = json.loads(path.read_text(encoding="utf-8"))
    total = 0
    ok = 0
    suite_reports = []
    with tempfile.TemporaryDirectory() as tmp:
        workdir = Path(tmp)
        for suite in data.get("suites", []):
            name = suite.get("name", "")
            s_ok = 0
            s_fail = []
            cases = suite.get("cases", [])
            for case in cases:
                total += 1
                result = run_case(case, workdir)
                if result["passed"]:
                    s_ok += 1
                    ok += 1
                else:
                    s_fail.append(result)
                mark = "ok" if result["passed"] else "FAIL " + "; ".join(result["reasons"])
                print(f"[{name}] {case['name']} -> exit={result['status']} {mark}")
            suite_reports.append({"name": name, "passed": s_ok, "total": len(cases), "failures": s_fail})
            print(f"SUITE '{name}' PASSED {s_ok}/{len(cases)}")
    return {"passed": ok, "total": total, "suites": suite_reports}


def main():
    ap = argparse.ArgumentParser(description="CLI regression suite")
    ap.add_argument("--cases", default=str(ROOT / "data" / "tests" / "regression_cases.json"))
    ap.add_argument("--out", default=str(ROOT / "data" / "reports" / "regression_report.json"))
    ap.add_argument("--fail-out", dest="fail_out", default=str(ROOT / "data" / "reports" / "regression_failures.json"))
    args = ap.parse_args()

    p = Path(args.cases)
    if not p.exists():
        print(f"No cases file: {p}")
        sys.exit(1)
    report = run_file(p)
    failures = [{"suite": s["name"], **f} for s in report["suites"] for f in s["failures"]]

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(report, ensure_ascii=False, indent=2), encoding="utf-8")
    print(f"Wrote report -> {out}")
    failp = Path(args.fail_out)
    failp.parent.mkdir(parents=True, exist_ok=True)
    failp.write_text(json.dumps(failures, ensure_ascii=False, indent=2), encoding="utf-8")
    print(f"Wrote failures -> {failp}")
    sys.exit(0 if report["passed"] == report["total"] else 1)


if __name__ == "__main__":
    main()
