"""Android resource-usage case study: ten APIs, twenty-five policies.

Each policy has the shape "acquire/release: callback", read as: once the app
calls ``acquire`` it must call ``release`` before ``callback`` reaches the
activity, unless it already did. Enforcers and CTL formulas are generated from
that template; resource protocols are bundled ``.enf`` files.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from importlib import resources

from .compose import DEFAULT_MAX_STATES, ExplorationBoundExceeded, Network, build_network, infer_targets
from .ctl import AG, AW, AX, Act, Formula, Implies, Not
from .dsl import ModelDocument, NetworkSpec, parse_document
from .edit2io import CompletionPolicy
from .mcheck import VerificationReport, verify
from .model import EditAutomaton, EditTransition, IOAutomaton, IOTransition, ModelError, Policy, inp

APP = "Activity"
CALLBACKS = ("onPause", "onStop", "onDestroy")


@dataclass(frozen=True)
class PolicyTemplate:
    acquire: str
    release: str
    callback: str

    def __post_init__(self) -> None:
        if self.acquire == self.release:
            raise ModelError(f"acquire and release are both {self.acquire!r}")
        if self.callback not in CALLBACKS:
            raise ModelError(f"callback {self.callback!r} is not one of {CALLBACKS}")

    def __str__(self) -> str:
        return f"{self.acquire}/{self.release}: {self.callback}"


@dataclass(frozen=True)
class CaseStudy:
    api: str
    package: str
    templates: tuple[PolicyTemplate, ...]
    expected: str  # "Yes" | "No"
    source: str  # bundled file holding the resource protocol

    @property
    def callback(self) -> str:
        callbacks = {t.callback for t in self.templates}
        if len(callbacks) != 1:
            raise ModelError(f"{self.api}: templates mix callbacks {sorted(callbacks)}")
        return callbacks.pop()

    def enforcer_name(self, i: int) -> str:
        return f"EA_{self.api}_{i}"

    def policy_name(self, i: int) -> str:
        return f"P_{self.api}_{i}"


def _t(spec: str) -> PolicyTemplate:
    pair, callback = spec.split(":")
    acquire, release = pair.split("/")
    return PolicyTemplate(acquire.strip(), release.strip(), callback.strip())


CASES: tuple[CaseStudy, ...] = (
    CaseStudy("BluetoothAdapter", "android.bluetooth", (
        _t("enable/disable: onDestroy"),
        _t("startDiscovery/cancelDiscovery: onDestroy"),
        _t("getProfileProxy/closeProfileProxy: onDestroy"),
    ), "No", "bluetoothadapter.enf"),
    CaseStudy("Camera", "android.hardware", (
        _t("lock/unlock: onPause"),
        _t("open/release: onPause"),
        _t("startFaceDetection/stopFaceDetection: onPause"),
        _t("startPreview/stopPreview: onPause"),
    ), "Yes", "camera.enf"),
    CaseStudy("AudioManager", "android.media", (
        _t("requestAudioFocus/abandonAudioFocus: onPause"),
        _t("startBluetoothSco/stopBluetoothSco: onPause"),
        _t("loadSoundEffects/unloadSoundEffects: onPause"),
    ), "No", "audiomanager.enf"),
    CaseStudy("MediaCodec", "android.media", (
        _t("createDecoderByType/release: onPause"),
        _t("start/stop: onPause"),
    ), "Yes", "mediacodec.enf"),
    CaseStudy("MediaPlayer", "android.media", (
        _t("init/release: onStop"),
        _t("create/release: onStop"),
        _t("start/stop: onStop"),
    ), "Yes", "mediaplayer_api.enf"),
    CaseStudy("MediaRecorder", "android.media", (
        _t("init/release: onStop"),
        _t("start/stop: onStop"),
    ), "Yes", "mediarecorder.enf"),
    CaseStudy("NfcAdapter", "android.nfc", (
        _t("enableForegroundDispatch/disableForegroundDispatch: onPause"),
        _t("enableForegroundNdefPush/disableForegroundNdefPush: onPause"),
    ), "No", "nfcadapter.enf"),
    CaseStudy("RemoteCallbackList", "android.os", (
        _t("beginBroadcast/finishBroadcast: onDestroy"),
        _t("register/unregister: onDestroy"),
    ), "No", "remotecallbacklist.enf"),
    CaseStudy("Surface", "android.view", (
        _t("init/release: onDestroy"),
        _t("lockCanvas/unlockCanvasAndPost: onDestroy"),
    ), "Yes", "surface.enf"),
    CaseStudy("SurfaceHolder", "android.view", (
        _t("addCallback/removeCallback: onDestroy"),
        _t("lockCanvas/unlockCanvasAndPost: onDestroy"),
    ), "No", "surfaceholder.enf"),
)


def list_cases() -> tuple[CaseStudy, ...]:
    return CASES


def case(api: str) -> CaseStudy:
    for c in CASES:
        if c.api.lower() == api.lower():
            return c
    raise ModelError(f"no catalog case {api!r}; known: {[c.api for c in CASES]}")


# --------------------------------------------------------------------------
# Generation


def generate_enforcer(t: PolicyTemplate, name: str = "EA") -> EditAutomaton:
    """Three states: outside the activity, running, and running with the resource held."""
    return EditAutomaton(
        name=name,
        alphabet=frozenset({"onCreate", t.callback, t.acquire, t.release}),
        states=("0", "1", "2"),
        initial="0",
        transitions=(
            EditTransition("0", "onCreate", "1", ("onCreate",)),
            EditTransition("1", t.callback, "0", (t.callback,)),
            EditTransition("1", t.acquire, "2", (t.acquire,)),
            EditTransition("2", t.callback, "0", (t.release, t.callback)),
            EditTransition("2", t.release, "1", (t.release,)),
        ),
    )


def policy_formula(t: PolicyTemplate) -> Formula:
    return AG(Implies(Act(t.acquire), AX(AW(Not(Act(t.callback)), Act(t.release)))))


def generate_policy(t: PolicyTemplate, resource: str, app: str = APP, name: str = "P") -> Policy:
    bindings = {t.acquire: (t.acquire, resource), t.release: (t.release, resource), t.callback: (t.callback, app)}
    return Policy(name, policy_formula(t), bindings)


# --------------------------------------------------------------------------
# Models


def _read(name: str) -> str:
    return resources.files("enfcheck").joinpath("data", name).read_text(encoding="utf-8")


def bundled_document(name: str) -> ModelDocument:
    """Parse a bundled ``.enf`` file, e.g. ``mediaplayer.enf``."""
    return parse_document(_read(name))


@functools.lru_cache(maxsize=None)
def resource_model(api: str) -> IOAutomaton:
    c = case(api)
    return bundled_document(c.source).frameworks[c.api]


@functools.lru_cache(maxsize=None)
def _base_lifecycle() -> IOAutomaton:
    return bundled_document("lifecycle.enf").frameworks[APP]


def usage_window(callback: str) -> tuple[str, ...]:
    """Lifecycle states from onCreate up to, but excluding, the effect of ``callback``."""
    base = _base_lifecycle()
    step = {t.source: t for t in base.transitions}
    state = next(t.target for t in base.transitions if t.action.name == "onCreate")
    window = []
    while state not in window:
        window.append(state)
        t = step[state]
        if t.action.name == callback:
            return tuple(window)
        state = t.target
    raise ModelError(f"callback {callback!r} never follows onCreate in the lifecycle")


def lifecycle_model(resource_actions, callback: str = "onPause") -> IOAutomaton:
    """Lifecycle where resource actions are allowed between onCreate and ``callback``.

    The window is modeled as one self-loop per resource action in each state
    of :func:`usage_window`.
    """
    base = _base_lifecycle()
    extra = sorted(set(resource_actions))
    loops = tuple(IOTransition(s, inp(a), s) for s in usage_window(callback) for a in extra)
    return IOAutomaton(
        name=base.name,
        states=base.states,
        start=base.start,
        inputs=base.inputs | frozenset(extra),
        transitions=base.transitions + loops,
    )


def case_frameworks(c: CaseStudy) -> list[tuple[str, IOAutomaton]]:
    res = resource_model(c.api)
    return [(APP, lifecycle_model(res.alphabet, c.callback)), (c.api, res)]


def case_network(c: CaseStudy, indices=None, name: str | None = None) -> tuple[Network, list[Policy]]:
    """Network with the enforcers at the given 1-based template indices (all by default)."""
    indices = list(indices) if indices is not None else list(range(1, len(c.templates) + 1))
    fws = case_frameworks(c)
    enforcers = [generate_enforcer(c.templates[i - 1], c.enforcer_name(i)) for i in indices]
    policies = [generate_policy(c.templates[i - 1], c.api, APP, c.policy_name(i)) for i in indices]
    targets = infer_targets(fws, APP)
    label = name or f"{c.api}[{','.join(map(str, indices))}]"
    return build_network(enforcers, fws, targets, CompletionPolicy.IDENTITY, app=APP, name=label), policies


def case_document(c: CaseStudy) -> ModelDocument:
    """A self-contained ``.enf`` document for the case: models, policies and networks."""
    doc = ModelDocument()
    n = len(c.templates)
    fws = case_frameworks(c)
    for i, t in enumerate(c.templates, start=1):
        doc.edit_automata[c.enforcer_name(i)] = generate_enforcer(t, c.enforcer_name(i))
        doc.order.append(("edit_automaton", c.enforcer_name(i)))
    for fid, m in fws:
        doc.frameworks[fid] = m
        doc.order.append(("lts", fid))
    for i, t in enumerate(c.templates, start=1):
        doc.policies[c.policy_name(i)] = Policy(c.policy_name(i), policy_formula(t))
        doc.order.append(("policy", c.policy_name(i)))
    groups = [("all", list(range(1, n + 1)))] + [(f"only_{i}", [i]) for i in range(1, n + 1)]
    for net_name, idx in groups:
        doc.networks[net_name] = NetworkSpec(
            name=net_name,
            enforcers=tuple(c.enforcer_name(i) for i in idx),
            app=APP,
            resources=(c.api,),
            completion=CompletionPolicy.IDENTITY,
            policies=tuple(c.policy_name(i) for i in idx),
        )
        doc.order.append(("network", net_name))
    return doc


# --------------------------------------------------------------------------
# Table reproduction


@dataclass(frozen=True)
class Row:
    api: str
    package: str
    templates: tuple[str, ...]
    expected: str
    verdict: str  # "Yes" | "No" | "inconclusive"
    evidence: str
    report: VerificationReport | None = None

    @property
    def matches(self) -> bool:
        return self.verdict == self.expected


@dataclass(frozen=True)
class CompatibilityCheck:
    description: str
    expected: str
    verdict: str
    evidence: str

    @property
    def matches(self) -> bool:
        return self.verdict == self.expected


@dataclass(frozen=True)
class Table1:
    rows: tuple[Row, ...]
    checks: tuple[CompatibilityCheck, ...]

    @property
    def interferences(self) -> int:
        return sum(r.verdict == "Yes" for r in self.rows)

    @property
    def all_match(self) -> bool:
        return all(r.matches for r in self.rows) and all(c.matches for c in self.checks)


def evidence_of(r: VerificationReport) -> str:
    if r.deadlocks:
        d = r.deadlocks[0]
        more = f" (+{len(r.deadlocks) - 1} more)" if len(r.deadlocks) > 1 else ""
        return f"deadlock after {' ; '.join(d.trace)}{more}"
    bad = [p for p in r.policies if not p.holds]
    if bad:
        return f"{bad[0].name} violated by {' ; '.join(bad[0].counterexample)}"
    return f"{len(r.policies)} policies hold, no deadlock in {r.stats.states} states"


def _judge(net: Network, policies: list[Policy], max_states: int, backend: str | None):
    try:
        r = verify(net, policies, max_states=max_states, backend=backend)
    except ExplorationBoundExceeded as exc:
        return "inconclusive", str(exc), None
    return ("Yes" if r.interference else "No"), evidence_of(r), r


def run_case(c: CaseStudy, indices=None, max_states: int = DEFAULT_MAX_STATES,
             backend: str | None = None) -> VerificationReport:
    net, policies = case_network(c, indices)
    return verify(net, policies, max_states=max_states, backend=backend)


def run_table1(max_states: int = DEFAULT_MAX_STATES, backend: str | None = None) -> Table1:
    rows = []
    for c in CASES:
        net, policies = case_network(c)
        verdict, evidence, report = _judge(net, policies, max_states, backend)
        rows.append(Row(c.api, c.package, tuple(map(str, c.templates)), c.expected, verdict, evidence, report))
    checks = []
    camera = case("Camera")
    net, policies = case_network(camera, [1, 3])
    verdict, evidence, _ = _judge(net, policies, max_states, backend)
    checks.append(CompatibilityCheck("Camera enforcers #1 and #3 together", "No", verdict, evidence))
    player = case("MediaPlayer")
    net, policies = case_network(player, [2, 3])
    verdict, evidence, _ = _judge(net, policies, max_states, backend)
    checks.append(CompatibilityCheck("MediaPlayer create/release with start/stop", "Yes", verdict, evidence))
    return Table1(tuple(rows), tuple(checks))


def format_table(t: Table1) -> str:
    width = max(len(f"{r.api} ({r.package})") for r in t.rows)
    lines = [f"{'API':<{width}}  {'policies':>8}  {'expected':>8}  {'verdict':>12}  match", "-" * (width + 44)]
    for r in t.rows:
        mark = "ok" if r.matches else "MISMATCH"
        lines.append(f"{r.api + ' (' + r.package + ')':<{width}}  {len(r.templates):>8}  {r.expected:>8}  "
                     f"{r.verdict:>12}  {mark}")
        lines.append(f"    {r.evidence}")
    lines.append("")
    for c in t.checks:
        mark = "ok" if c.matches else "MISMATCH"
        lines.append(f"{c.description}: interference {c.verdict} (expected {c.expected}) {mark}")
        lines.append(f"    {c.evidence}")
    lines.append("")
    lines.append(f"{t.interferences}/{len(t.rows)} interferences")
    return "\n".join(lines)


def format_list() -> str:
    lines = []
    for c in CASES:
        lines.append(f"{c.api} ({c.package}) expected {c.expected}")
        for i, t in enumerate(c.templates, start=1):
            lines.append(f"  #{i} {t}")
    total = sum(len(c.templates) for c in CASES)
    lines.append(f"{len(CASES)} APIs, {total} policies")
    return "\n".join(lines)
