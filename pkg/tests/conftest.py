import pytest

from normsynth.harness import build_config

TINY_SOCIETY = {"num_agents": 20, "path_length": 2, "num_samples": 1}
TINY_PARAMS = {"population_size": 8, "generations": 2}

# criterion id -> list of (passed, test name, detail)
_CRITERIA: dict[str, list[tuple[bool, str, str]]] = {}


@pytest.fixture
def tiny_config(tmp_path):
    def make(**overrides):
        values = {
            "problem": "two",
            "algorithms": ["NSGA2", "SPEA2"],
            "executions": 3,
            "master_seed": 11,
            "out": str(tmp_path / "campaign"),
            "society": dict(TINY_SOCIETY),
            "params": dict(TINY_PARAMS),
        }
        values.update(overrides)
        return build_config(**values)

    return make


@pytest.fixture
def detail(request):
    """Append a short measurement to the criterion's summary line."""
    notes: list[str] = []
    request.node._criterion_notes = notes
    return notes.append


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        notes = "; ".join(getattr(item, "_criterion_notes", []))
        _CRITERIA.setdefault(marker.args[0], []).append((rep.passed, item.name, notes))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_CRITERIA):
        results = _CRITERIA[cid]
        ok = all(passed for passed, _, _ in results)
        failed = [name for passed, name, _ in results if not passed]
        notes = " | ".join(n for _, _, n in results if n)
        line = f"{cid} {'PASS' if ok else 'FAIL'}"
        if failed:
            line += f" (failed: {', '.join(failed)})"
        if notes:
            line += f"  {notes}"
        terminalreporter.write_line(line)
