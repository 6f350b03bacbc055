"""Constructors for the four worked example games, plus their reference policies."""
from __future__ import annotations

import itertools

from .errors import BudgetExceededError
from .game import ASSISTANT, HUMAN, Poag, Policy, ensure_valid

NULL = "null"


def revealing_errors() -> Poag:
    """Assistant installs a package with or without logging; the human then runs or skips.

    Install succeeds with probability 1/2.  Running after a success pays +1,
    after a failure -2; skipping pays 0.  Two decision steps, gamma = 1.
    """
    states = ("start", "success", "failure", "end")

    def transition(s, h, a):
        if s == "start":
            return {"success": 0.5, "failure": 0.5}
        return {"end": 1.0}

    def reward(s, h, a, th):
        if h != "run" or s not in ("success", "failure"):
            return 0.0
        return 1.0 if s == "success" else -2.0

    def observe(s2, h, a):
        if s2 in ("success", "failure"):
            return {(s2 if a == "log_and_install" else "empty", NULL): 1.0}
        return {(NULL, NULL): 1.0}

    game = Poag.from_functions(
        states=states, human_actions=("run", "skip"),
        assistant_actions=("install", "log_and_install"), thetas=("default",),
        human_obs=(NULL, "empty", "success", "failure"), assistant_obs=(NULL,),
        transition=transition, reward=reward, observe=observe,
        initial={("start", "default"): 1.0}, gamma=1.0, horizon=2, name="revealing-errors")
    return ensure_valid(game)


def _bits(n):
    return ["".join(b) for b in itertools.product("01", repeat=n)]


def _and(x, y):
    return "".join("1" if a == b == "1" else "0" for a, b in zip(x, y))


MAX_DENSE_VERSIONS = 4


def cuda_versions(n: int = 3) -> Poag:
    """Version-list suppression game with ``n`` package versions.

    States are ``I``, ``E`` and ``"<timebit>:<avail>:<compat>"``.  Assistant
    actions are keep-masks (a 0 bit suppresses that version); the assistant
    sees the compatibility bits one step before the human sees the masked list.
    """
    if not 2 <= n <= 10:
        raise ValueError("n must lie in [2, 10]")
    if n > MAX_DENSE_VERSIONS:
        # dense tables grow as 16**n; 10 versions need ~10**13 transition entries
        raise BudgetExceededError(4 ** (2 * n), 4 ** (2 * MAX_DENSE_VERSIONS), "dense cuda table")
    masks = _bits(n)
    inner = [f"{tb}:{av}:{co}" for tb in "01" for av in masks for co in masks]
    states = ("I",) + tuple(inner) + ("E",)
    good = [f"0:{av}:{co}" for av in masks for co in masks if "1" in _and(av, co)]

    def transition(s, h, a):
        if s == "I":
            return {g: 1.0 / len(good) for g in good}
        if s == "E" or s[0] == "1":
            return {"E": 1.0}
        return {"1" + s[1:]: 1.0}

    def reward(s, h, a, th):
        if s in ("I", "E") or s[0] == "0":
            return 0.0
        _, av, co = s.split(":")
        i = int(h) - 1
        return float(av[i] == co[i] == "1")

    def observe(s2, h, a):
        if s2 in ("I", "E"):
            return {(NULL, NULL): 1.0}
        tb, av, co = s2.split(":")
        if tb == "0":
            return {(NULL, co): 1.0}
        return {(_and(av, a), NULL): 1.0}

    game = Poag.from_functions(
        states=states, human_actions=tuple(str(i + 1) for i in range(n)),
        assistant_actions=tuple(reversed(masks)), thetas=("default",),
        human_obs=tuple(masks) + (NULL,), assistant_obs=tuple(masks) + (NULL,),
        transition=transition, reward=reward, observe=observe,
        initial={("I", "default"): 1.0}, gamma=1.0, horizon=3, name=f"cuda-versions-{n}")
    return ensure_valid(game)


NODE_CONFIGS = ("gc", "cg", "ia", "ai")  # node1/node2: g=GPU, c=CPU, i=Intel CPU, a=AMD CPU
NODE_PREFS = ("gpu-intel", "gpu-amd", "cpu-intel", "cpu-amd")
_NODE_KIND = {"g": "gpu", "c": "cpu", "i": "intel", "a": "amd"}


def _node_utility(config: str, node: int, pref: str) -> float:
    kind = _NODE_KIND[config[node]]
    favored_type, favored_vendor = pref.split("-")
    if kind in ("gpu", "cpu"):
        return float(kind == favored_type)
    return float(kind == favored_vendor)


def node_scheduling() -> Poag:
    """Job-scheduling game where a relabelled node list makes a naive pick informative.

    Step 0: the assistant shows the node list as is or relabels a CPU/CPU pair
    as GPU/CPU.  Step 1: the human (who knows her preference) picks a node,
    earning 1 for her favored type (or favored CPU vendor in a CPU/CPU pair).
    Step 2: the assistant runs a follow-up job on a CPU or GPU node, earning 10
    if it matches her favored type.
    """
    states = tuple(f"{ph}/{c}/{p}" for ph in ("start", "pick", "sched")
                   for c in NODE_CONFIGS for p in NODE_PREFS) + ("end",)
    displays = NODE_CONFIGS
    human_obs = tuple(f"{p}|{d}" for p in NODE_PREFS for d in displays) + (
        "chose-node1", "chose-node2", NULL)
    assistant_obs = displays + ("node1", "node2", NULL)

    def transition(s, h, a):
        if s == "end":
            return {"end": 1.0}
        ph, c, p = s.split("/")
        nxt = {"start": "pick", "pick": "sched"}.get(ph)
        return {f"{nxt}/{c}/{p}": 1.0} if nxt else {"end": 1.0}

    def reward(s, h, a, th):
        if s == "end":
            return 0.0
        ph, c, p = s.split("/")
        if ph == "pick":
            return _node_utility(c, 0 if h == "node1" else 1, p)
        if ph == "sched" and a in ("run-cpu", "run-gpu"):
            return 10.0 if a == "run-" + p.split("-")[0] else 0.0
        return 0.0

    def observe(s2, h, a):
        if s2 == "end":
            return {(NULL, NULL): 1.0}
        ph, c, p = s2.split("/")
        if ph == "pick":
            shown = "gc" if (a == "relabel" and c in ("ia", "ai")) else c
            return {(f"{p}|{shown}", shown): 1.0}
        if ph == "sched":
            return {(f"chose-{h}", h): 1.0}
        return {(NULL, NULL): 1.0}

    start = {(f"start/{c}/{p}", "default"): 1.0 / 16 for c in NODE_CONFIGS for p in NODE_PREFS}
    game = Poag.from_functions(
        states=states, human_actions=("node1", "node2"),
        assistant_actions=("show", "relabel", "run-cpu", "run-gpu"), thetas=("default",),
        human_obs=human_obs, assistant_obs=assistant_obs, transition=transition,
        reward=reward, observe=observe, initial=start, gamma=1.0, horizon=3,
        name="node-scheduling")
    return ensure_valid(game)


MAN_TLDR_STATES = ("s_a", "s_b", "s_c", "s_d")


def man_tldr() -> Poag:
    """Manual page versus summary before choosing a command flag.

    Flag 1 pays 7 in ``s_a`` and 1 in ``s_b``; flag 2 pays 7 in ``s_c`` and 1 in
    ``s_d``.  ``man`` reveals the state, ``tldr`` only the better flag.
    """
    inner = tuple(f"{b},{x}" for b in "01" for x in MAN_TLDR_STATES)
    states = ("I",) + inner + ("E",)
    obs = MAN_TLDR_STATES + ("1", "2", NULL)
    payoff = {("s_a", "1"): 7.0, ("s_b", "1"): 1.0, ("s_c", "2"): 7.0, ("s_d", "2"): 1.0}

    def transition(s, h, a):
        if s == "I":
            return {f"0,{x}": 0.25 for x in MAN_TLDR_STATES}
        if s.startswith("0,"):
            return {"1," + s[2:]: 1.0}
        return {"E": 1.0}

    def reward(s, h, a, th):
        if not s.startswith("1,"):
            return 0.0
        return payoff.get((s[2:], h), 0.0)

    def observe(s2, h, a):
        if s2.startswith("0,"):
            x = s2[2:]
            o = x if a == "man" else ("1" if x in ("s_a", "s_b") else "2")
            return {(o, o): 1.0}
        return {(NULL, NULL): 1.0}

    game = Poag.from_functions(
        states=states, human_actions=("1", "2"), assistant_actions=("tldr", "man"),
        thetas=("default",), human_obs=obs, assistant_obs=obs, transition=transition,
        reward=reward, observe=observe, initial={("I", "default"): 1.0}, gamma=1.0,
        horizon=3, name="man-tldr")
    return ensure_valid(game)


BUILTIN = {
    "revealing-errors": revealing_errors,
    "cuda-versions": cuda_versions,
    "node-scheduling": node_scheduling,
    "man-tldr": man_tldr,
}


def build(name: str, n: int | None = None) -> Poag:
    try:
        ctor = BUILTIN[name]
    except KeyError:
        raise ValueError(f"unknown example {name!r}; choose from {sorted(BUILTIN)}") from None
    if name == "cuda-versions":
        return ctor(3 if n is None else n)
    return ctor()


# -- reference policies -----------------------------------------------------

def run_iff_success(game: Poag) -> Policy:
    return Policy.from_rule(
        game, HUMAN, lambda h: "run" if h and h[-1][1] == "success" else "skip",
        name="run iff success")


def never_run(game: Poag) -> Policy:
    return Policy.constant(game, HUMAN, "skip")


def suppress_incompatible(game: Poag) -> Policy:
    """Keep exactly the compatible versions once they are observed."""
    keep_all = game.assistant_actions[0]

    def rule(h):
        if len(h) == 1 and h[0][1] != NULL:
            return h[0][1]
        return keep_all

    return Policy.from_rule(game, ASSISTANT, rule, name="suppress incompatible")


def suppress_fixed(game: Poag, mask: str) -> Policy:
    """Play the same keep-mask whatever the compatibility bits are."""
    keep_all = game.assistant_actions[0]
    return Policy.from_rule(game, ASSISTANT, lambda h: mask if len(h) == 1 else keep_all,
                            name=f"always keep {mask}")


def install_first_listed(game: Poag) -> Policy:
    """Install the lowest-numbered version shown as available (version 1 if none)."""

    def rule(h):
        if h and h[-1][1] != NULL and "1" in h[-1][1]:
            return str(h[-1][1].index("1") + 1)
        return "1"

    return Policy.from_rule(game, HUMAN, rule, name="install first listed")


def naive_node_choice(game: Poag) -> Policy:
    """Pick the node that looks best at face value."""

    def rule(h):
        if h and "|" in h[-1][1]:
            pref, shown = h[-1][1].split("|")
            u = [_node_utility(shown, i, pref) for i in (0, 1)]
            return "node2" if u[1] > u[0] else "node1"
        return "node1"

    return Policy.from_rule(game, HUMAN, rule, name="naive pick")


def signaling_node_choice(game: Poag) -> Policy:
    """Encode the GPU/CPU preference in the pick whenever the list shows two CPUs."""

    def rule(h):
        if h and "|" in h[-1][1]:
            pref, shown = h[-1][1].split("|")
            if shown in ("ia", "ai"):
                return "node1" if pref.startswith("gpu") else "node2"
            u = [_node_utility(shown, i, pref) for i in (0, 1)]
            return "node2" if u[1] > u[0] else "node1"
        return "node1"

    return Policy.from_rule(game, HUMAN, rule, name="signaling pick")


def node_assistant(game: Poag, relabel: bool) -> Policy:
    """Show (or relabel) the list, then run the job type the pick revealed.

    The decoding assumes the human picks the GPU-looking node iff she favors
    GPUs whenever one is shown, and otherwise reads the pick as a vendor choice.
    """

    def rule(h):
        if not h:
            return "relabel" if relabel else "show"
        if len(h) == 1:
            return "show"
        shown, pick = h[0][1], h[1][1]
        gpu_node = {"gc": "node1", "cg": "node2"}.get(shown)
        if gpu_node is None:
            return "run-cpu"
        return "run-gpu" if pick == gpu_node else "run-cpu"

    return Policy.from_rule(game, ASSISTANT, rule,
                            name="relabel and decode" if relabel else "show and decode")
