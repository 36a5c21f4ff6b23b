"""Monte Carlo character-error-rate simulation of a slotted molecular link.

Each trial transmits one message of independently drawn characters. Every
bit-1 slot releases a fixed molecule budget whose arrivals spread over the
channel memory window; slot counts are thresholded into bits, optionally
error corrected, parsed back into characters and scored positionally
against the sent message.

Determinism contract: trials are processed in fixed chunks of
CHUNK_TRIALS, and chunk c draws all of its randomness from a dedicated
generator seeded by (master_seed, stream tag, c). Results are therefore
bit-identical for a given (master_seed, trials) no matter how many worker
threads process the chunks. Changing CHUNK_TRIALS changes the streams.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import codec
from .channel import ChannelParams, ChannelProfile
from .codebooks import (
    Codebook,
    CharacterDistribution,
    build_huffman,
    build_proposed,
    expected_length,
    expected_ones,
    ita2,
)
from .codec import (
    CalibratedThreshold,
    ConstantThreshold,
    PilotThreshold,
    ThresholdStrategy,
)

__all__ = [
    "CHUNK_TRIALS",
    "LinkConfig",
    "CerReport",
    "SimulatedMessage",
    "fair_budgets",
    "sample_arrivals",
    "simulate_message",
    "resolve_threshold",
    "run_cer",
    "sweep",
]

#: Trials per deterministic chunk; part of the reproducibility contract.
CHUNK_TRIALS = 8192

_MAIN_TAG = 0xC0DE
_CAL_TAG = 0xCA1


@dataclass(frozen=True)
class LinkConfig:
    """Everything needed to simulate one codebook on one channel.

    The slot length of the profile must match char_duration divided by the
    expected codeword length, so every codebook transmits characters at the
    same average rate regardless of its bit count. A zero molecule budget
    is allowed and gives the all-silent baseline link.
    """

    codebook: Codebook
    distribution: CharacterDistribution
    profile: ChannelProfile
    molecules_per_one: int
    char_duration: float
    threshold: ThresholdStrategy
    msg_len: int = 10
    trials: int = 100_000
    master_seed: int = 0

    def __post_init__(self) -> None:
        if self.molecules_per_one < 0:
            raise ValueError("molecule budget must be non-negative")
        if self.msg_len < 1:
            raise ValueError("messages must have at least 1 character")
        if self.trials < 1:
            raise ValueError("need at least 1 trial")
        if self.master_seed < 0:
            raise ValueError("master seed must be non-negative")
        if self.char_duration <= 0:
            raise ValueError("character duration must be positive")
        want = self.char_duration / expected_length(self.codebook, self.distribution)
        if abs(self.profile.slot - want) > 1e-9 * want:
            raise ValueError(
                f"profile slot {self.profile.slot!r} does not match "
                f"char_duration / expected codeword length = {want!r}"
            )

    @classmethod
    def build(
        cls,
        codebook: Codebook,
        distribution: CharacterDistribution,
        params: ChannelParams,
        molecules_per_one: int,
        char_duration: float,
        threshold: ThresholdStrategy,
        msg_len: int = 10,
        memory: int = 10,
        trials: int = 100_000,
        master_seed: int = 0,
    ) -> "LinkConfig":
        slot = char_duration / expected_length(codebook, distribution)
        profile = ChannelProfile.build(params, slot, memory)
        return cls(
            codebook=codebook,
            distribution=distribution,
            profile=profile,
            molecules_per_one=molecules_per_one,
            char_duration=char_duration,
            threshold=threshold,
            msg_len=msg_len,
            trials=trials,
            master_seed=master_seed,
        )


@dataclass(frozen=True)
class CerReport:
    """Outcome of a run_cer call.

    bit_counts maps sent-received pairs ("10" means sent 1, read 0) over
    the post-correction bit stream. context_counts and context_rates hold
    the two context-conditional error statistics that drive the character
    error rate of a run-length-limited link: a spurious 1 two slots after a
    legal 1 (context 100) and a missed legal 1 (context x01).
    """

    cer: float
    cer_stderr: float
    char_errors: int
    chars: int
    trials: int
    tau: float
    threshold_origin: str
    master_seed: int
    bit_counts: dict[str, int]
    context_counts: dict[str, int]
    context_rates: dict[str, float]
    anomalies: dict[str, int]
    config: LinkConfig


def fair_budgets(
    dist: CharacterDistribution,
    base_molecules: int,
    kinds: Sequence[str] = ("huffman", "proposed", "ita2"),
) -> dict[str, int]:
    """Per-bit-1 molecule budgets that equalize molecules per character.

    base_molecules is the budget of the Huffman code; every other codebook
    gets base * E[ones](huffman) / E[ones](kind), rounded to the nearest
    integer, so all kinds spend the same expected molecule count per
    transmitted character.
    """
    if base_molecules < 1:
        raise ValueError("base budget must be at least 1")
    builders = {"huffman": build_huffman, "proposed": build_proposed, "ita2": lambda d: ita2()}
    ones_h = expected_ones(build_huffman(dist), dist)
    out: dict[str, int] = {}
    for kind in kinds:
        try:
            cb = builders[kind](dist)
        except KeyError:
            raise ValueError(f"unknown codebook kind {kind!r}") from None
        out[kind] = int(round(base_molecules * ones_h / expected_ones(cb, dist)))
    return out


def _budget_share(dist: CharacterDistribution, cb: Codebook, molecules_per_char: float) -> int:
    """Bit-1 budget that spends molecules_per_char on average per character."""
    if molecules_per_char < 0:
        raise ValueError("a molecule budget cannot be negative")
    return int(round(molecules_per_char / expected_ones(cb, dist)))


def sample_arrivals(
    molecules: int,
    coefficients: Sequence[float],
    rng: np.random.Generator,
    size: int | None = None,
) -> np.ndarray:
    """Arrival counts per memory slot for one release of molecules.

    Sampling is sequential binomial over the slots: conditioned on what
    already arrived, the count of slot k is binomial out of the remaining
    molecules with the renormalized slot probability. The marginal of each
    slot count is Binomial(molecules, a_k) and the total never exceeds the
    release. With size given, that many independent releases are drawn and
    an array of shape (size, memory) is returned.
    """
    coeffs = np.asarray(coefficients, dtype=float)
    if molecules < 0:
        raise ValueError("molecule count must be non-negative")
    if (coeffs < 0).any() or coeffs.sum() > 1.0 + 1e-12:
        raise ValueError("arrival coefficients must be non-negative and sum to at most 1")
    n = 1 if size is None else int(size)
    remaining = np.full(n, molecules, dtype=np.int64)
    out = np.empty((n, len(coeffs)), dtype=np.int64)
    consumed = 0.0
    for k, a in enumerate(coeffs):
        rest = 1.0 - consumed
        p = min(a / rest, 1.0) if rest > 1e-15 else 0.0
        out[:, k] = rng.binomial(remaining, p)
        remaining -= out[:, k]
        consumed += a
    return out[0] if size is None else out


@dataclass(frozen=True)
class SimulatedMessage:
    """Single-trial transcript, the readable counterpart of the array engine."""

    text: str
    sent_bits: str
    slot_counts: tuple[int, ...]
    detected_bits: str
    corrected_bits: str | None
    decoded: codec.DecodeResult
    char_errors: int


def simulate_message(
    text: str,
    cfg: LinkConfig,
    rng: np.random.Generator,
    tau: float | None = None,
) -> SimulatedMessage:
    """Run one message through the full pipeline, step by step.

    The threshold must already be a number: either pass tau explicitly or
    configure the link with a ConstantThreshold.
    """
    if tau is None:
        if not isinstance(cfg.threshold, ConstantThreshold):
            raise ValueError(
                "simulate_message needs a resolved threshold; pass tau or use "
                "a ConstantThreshold"
            )
        tau = cfg.threshold.tau
    bits = codec.encode(text, cfg.codebook)
    memory = cfg.profile.memory
    counts = np.zeros(len(bits), dtype=np.int64)
    for i, b in enumerate(bits):
        if b != "1":
            continue
        arrivals = sample_arrivals(cfg.molecules_per_one, cfg.profile.coefficients, rng)
        keep = min(memory, len(bits) - i)
        counts[i:i + keep] += arrivals[:keep]
    detected = codec.detect(counts.tolist(), tau)
    corrected = codec.error_correct(detected) if cfg.codebook.kind == "proposed" else None
    decoded = codec.decode(corrected if corrected is not None else detected, cfg.codebook)
    errors = sum(
        1 for i in range(len(text))
        if i >= len(decoded.symbols) or decoded.symbols[i] != text[i]
    )
    return SimulatedMessage(
        text=text,
        sent_bits=bits,
        slot_counts=tuple(int(c) for c in counts),
        detected_bits=detected,
        corrected_bits=corrected,
        decoded=decoded,
        char_errors=errors,
    )


class _Automaton:
    """Codeword trie as flat transition tables for the array decoder.

    State 0 is the root; the extra absorbing state (index dead) is entered
    on any bit with no trie edge, which models the sequential decoder
    stopping at a dead end. emit[s, b] holds the decoded symbol index when
    the edge completes a codeword, else -1.
    """

    def __init__(self, cb: Codebook, symbols: Sequence[str]):
        order = {s: i for i, s in enumerate(symbols)}
        children: list[list[int]] = [[-1, -1]]
        leaf: list[list[int]] = [[-1, -1]]
        for sym, word in cb.codewords.items():
            node = 0
            for bit in word[:-1]:
                b = int(bit)
                if children[node][b] == -1:
                    children.append([-1, -1])
                    leaf.append([-1, -1])
                    children[node][b] = len(children) - 1
                node = children[node][b]
            leaf[node][int(word[-1])] = order[sym]
        n = len(children)
        self.dead = n
        self.trans = np.full((n + 1, 2), self.dead, dtype=np.int32)
        self.emit = np.full((n + 1, 2), -1, dtype=np.int16)
        for s in range(n):
            for b in (0, 1):
                if leaf[s][b] >= 0:
                    self.trans[s, b] = 0
                    self.emit[s, b] = leaf[s][b]
                elif children[s][b] >= 0:
                    self.trans[s, b] = children[s][b]


class _Tables:
    """Per-codebook constants shared by all chunks of a run."""

    def __init__(self, cfg: LinkConfig):
        dist = cfg.distribution
        self.words = [cfg.codebook.codewords[s] for s in dist.symbols]
        self.probs = np.asarray(dist.probs)
        self.word_len = np.array([len(w) for w in self.words], dtype=np.int64)
        self.word_flat = np.array(
            [int(b) for w in self.words for b in w], dtype=np.int8
        )
        self.word_off = np.zeros(len(self.words), dtype=np.int64)
        np.cumsum(self.word_len[:-1], out=self.word_off[1:])
        self.automaton = _Automaton(cfg.codebook, dist.symbols)
        self.correct = cfg.codebook.kind == "proposed"


def _excl_cumsum(a: np.ndarray) -> np.ndarray:
    out = np.zeros(len(a), dtype=np.int64)
    np.cumsum(a[:-1], out=out[1:])
    return out


def _sample_bits(tables: _Tables, trials: int, msg_len: int, rng: np.random.Generator):
    """Draw messages and lay their codewords into a padded bit matrix."""
    syms = rng.choice(len(tables.words), size=trials * msg_len, p=tables.probs)
    syms = syms.reshape(trials, msg_len)
    reps = tables.word_len[syms.ravel()]
    tlen = reps.reshape(trials, msg_len).sum(axis=1)
    total = int(reps.sum())
    in_word = np.arange(total, dtype=np.int64) - np.repeat(_excl_cumsum(reps), reps)
    flat_bits = tables.word_flat[np.repeat(tables.word_off[syms.ravel()], reps) + in_word]

    max_t = int(tlen.max())
    row = np.repeat(np.arange(trials, dtype=np.int64), tlen)
    col = np.arange(total, dtype=np.int64) - np.repeat(_excl_cumsum(tlen), tlen)
    bitmat = np.zeros((trials, max_t), dtype=np.int8)
    bitmat[row, col] = flat_bits
    return syms, tlen, bitmat


def _accumulate_counts(bitmat, tlen, cfg: LinkConfig, rng) -> np.ndarray:
    """Superpose the arrival spreads of every bit-1 release into slot counts."""
    trials, max_t = bitmat.shape
    er, ec = np.nonzero(bitmat)
    counts = np.zeros(trials * max_t, dtype=np.float64)
    if er.size:
        arrivals = sample_arrivals(
            cfg.molecules_per_one, cfg.profile.coefficients, rng, size=er.size
        )
        for k in range(cfg.profile.memory):
            dest = ec + k
            keep = dest < max_t
            if not keep.any():
                break
            lin = er[keep] * max_t + dest[keep]
            counts += np.bincount(lin, weights=arrivals[keep, k], minlength=trials * max_t)
    return counts.reshape(trials, max_t)


def _correct_rows(det: np.ndarray) -> np.ndarray:
    """Row-wise sequential error correction of a 0/1 matrix."""
    out = np.empty_like(det)
    prev = np.zeros(det.shape[0], dtype=det.dtype)
    for t in range(det.shape[1]):
        cur = det[:, t] & (1 - prev)
        out[:, t] = cur
        prev = cur
    return out


def _decode_rows(final: np.ndarray, tlen: np.ndarray, auto: _Automaton, msg_len: int):
    """Walk the trie automaton along every row; returns symbols and flags."""
    trials, max_t = final.shape
    state = np.zeros(trials, dtype=np.int32)
    dec_len = np.zeros(trials, dtype=np.int64)
    out = np.full((trials, msg_len), -1, dtype=np.int16)
    rows = np.arange(trials)
    for t in range(max_t):
        act = t < tlen
        if not act.any():
            break
        b = final[:, t].astype(np.int64)
        e = auto.emit[state, b]
        ns = auto.trans[state, b]
        fire = act & (e >= 0)
        if fire.any():
            idx = rows[fire]
            store = idx[dec_len[idx] < msg_len]
            out[store, dec_len[store]] = e[fire][dec_len[idx] < msg_len]
            dec_len[idx] += 1
        state = np.where(act, ns, state)
    dead = state == auto.dead
    incomplete = (~dead) & (state != 0)
    return out, dec_len, dead, incomplete


def _run_chunk(cfg: LinkConfig, tables: _Tables, trials: int, tau: float, seed_tuple):
    rng = np.random.default_rng(np.random.SeedSequence(seed_tuple))
    syms, tlen, bitmat = _sample_bits(tables, trials, cfg.msg_len, rng)
    counts = _accumulate_counts(bitmat, tlen, cfg, rng)
    out = _score_block(cfg, tables, syms, tlen, bitmat, counts, tau)
    return out


def _score_block(cfg: LinkConfig, tables: _Tables, syms, tlen, bitmat, counts, tau):
    """Detect, correct, decode and score one block of already sampled trials."""
    trials, max_t = bitmat.shape
    det = (counts >= tau).astype(np.int8)
    final = _correct_rows(det) if tables.correct else det
    out, dec_len, dead, incomplete = _decode_rows(
        final, tlen, tables.automaton, cfg.msg_len
    )

    err_per_trial = (out != syms).sum(axis=1)
    sum_err = int(err_per_trial.sum())
    sum_err_sq = int((err_per_trial.astype(np.int64) ** 2).sum())

    valid = np.arange(max_t)[None, :] < tlen[:, None]
    pair = (bitmat.astype(np.int64) * 2 + final)[valid]
    bit_counts = np.bincount(pair, minlength=4)

    sent = bitmat
    got = final
    v = valid
    ctx100 = (sent[:, :-2] == 1) & (sent[:, 1:-1] == 0) & (sent[:, 2:] == 0) & v[:, 2:]
    ctx100_err = ctx100 & (got[:, 2:] == 1)
    ctx_x01 = (sent[:, :-1] == 0) & (sent[:, 1:] == 1) & v[:, 1:]
    ctx_x01_err = ctx_x01 & (got[:, 1:] == 0)

    return {
        "trials": trials,
        "sum_err": sum_err,
        "sum_err_sq": sum_err_sq,
        "bits": [int(x) for x in bit_counts],
        "ctx_100": int(ctx100.sum()),
        "ctx_100_err": int(ctx100_err.sum()),
        "ctx_x01": int(ctx_x01.sum()),
        "ctx_x01_err": int(ctx_x01_err.sum()),
        "dead_end": int(dead.sum()),
        "incomplete_tail": int(incomplete.sum()),
        "decoded_overflow": int((dec_len > cfg.msg_len).sum()),
    }


def resolve_threshold(cfg: LinkConfig, master_seed: int) -> tuple[float, str]:
    """Turn the configured threshold strategy into a number.

    Pilot and calibration randomness comes from dedicated substreams of
    master_seed, so resolving never perturbs the main simulation stream.
    """
    strat = cfg.threshold
    if isinstance(strat, ConstantThreshold):
        return strat.tau, "constant"
    if isinstance(strat, PilotThreshold):
        stats = codec.collect_pilot_stats(
            cfg.codebook,
            cfg.profile,
            cfg.molecules_per_one,
            master_seed,
            repetitions=strat.repetitions,
            drop_first_slot=strat.drop_first_slot,
        )
        return stats.tau, "pilot"
    if isinstance(strat, CalibratedThreshold):
        return _calibrate_threshold(cfg, strat, master_seed), "calibrated"
    raise TypeError(f"unknown threshold strategy {strat!r}")


def _thread_count(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("MOLCODE_THREADS", "").strip()
    return max(1, int(env)) if env else 1


def run_cer(cfg: LinkConfig, threads: int | None = None) -> CerReport:
    """Estimate the character error rate of a link over random messages.

    Runs cfg.trials messages seeded from cfg.master_seed. threads defaults
    to the MOLCODE_THREADS environment variable (1 when unset); the result
    is bit-identical for any thread count.
    """
    trials = cfg.trials
    master_seed = cfg.master_seed
    tau, origin = resolve_threshold(cfg, master_seed)
    tables = _Tables(cfg)
    sizes = [CHUNK_TRIALS] * (trials // CHUNK_TRIALS)
    if trials % CHUNK_TRIALS:
        sizes.append(trials % CHUNK_TRIALS)

    def work(item):
        index, size = item
        return _run_chunk(cfg, tables, size, tau, (master_seed, _MAIN_TAG, index))

    jobs = list(enumerate(sizes))
    n_threads = _thread_count(threads)
    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            parts = list(pool.map(work, jobs))
    else:
        parts = [work(j) for j in jobs]

    sum_err = sum(p["sum_err"] for p in parts)
    sum_err_sq = sum(p["sum_err_sq"] for p in parts)
    chars = trials * cfg.msg_len
    cer = sum_err / chars
    mean_e = sum_err / trials
    var_e = max(sum_err_sq / trials - mean_e ** 2, 0.0)
    stderr = (var_e / trials) ** 0.5 / cfg.msg_len
    bits = [sum(p["bits"][i] for p in parts) for i in range(4)]
    ctx = {
        key: sum(p[key] for p in parts)
        for key in ("ctx_100", "ctx_100_err", "ctx_x01", "ctx_x01_err")
    }
    anomalies = {
        key: sum(p[key] for p in parts)
        for key in ("dead_end", "incomplete_tail", "decoded_overflow")
    }
    return CerReport(
        cer=cer,
        cer_stderr=stderr,
        char_errors=sum_err,
        chars=chars,
        trials=trials,
        tau=tau,
        threshold_origin=origin,
        master_seed=master_seed,
        bit_counts={"00": bits[0], "01": bits[1], "10": bits[2], "11": bits[3]},
        context_counts=ctx,
        context_rates={
            "one_given_100": ctx["ctx_100_err"] / ctx["ctx_100"] if ctx["ctx_100"] else 0.0,
            "zero_given_x01": ctx["ctx_x01_err"] / ctx["ctx_x01"] if ctx["ctx_x01"] else 0.0,
        },
        anomalies=anomalies,
        config=cfg,
    )


def _default_candidates(cfg: LinkConfig) -> tuple[float, ...]:
    # The natural threshold scale is the expected first-slot signal; the
    # floor keeps the grid valid for the zero-budget baseline link.
    scale = max(cfg.molecules_per_one * cfg.profile.coefficients[0], 1.0)
    return tuple(scale * f for f in np.linspace(0.05, 1.2, 24))


def _calibrate_threshold(
    cfg: LinkConfig, strategy: CalibratedThreshold, master_seed: int
) -> float:
    """Score every candidate tau on one shared batch; smallest tau wins ties."""
    candidates = strategy.candidates or _default_candidates(cfg)
    tables = _Tables(cfg)
    errors = np.zeros(len(candidates), dtype=np.int64)
    remaining = strategy.messages
    index = 0
    while remaining > 0:
        size = min(CHUNK_TRIALS, remaining)
        rng = np.random.default_rng(
            np.random.SeedSequence((master_seed, _CAL_TAG, index))
        )
        syms, tlen, bitmat = _sample_bits(tables, size, cfg.msg_len, rng)
        counts = _accumulate_counts(bitmat, tlen, cfg, rng)
        for ci, tau in enumerate(candidates):
            part = _score_block(cfg, tables, syms, tlen, bitmat, counts, tau)
            errors[ci] += part["sum_err"]
        remaining -= size
        index += 1
    best = 0
    for ci in range(1, len(candidates)):
        if errors[ci] < errors[best]:
            best = ci
    return float(candidates[best])


def sweep(
    dist: CharacterDistribution,
    params: ChannelParams,
    budgets: Iterable[float],
    trials: int,
    master_seed: int,
    kinds: Sequence[str] = ("huffman", "proposed", "ita2"),
    chars_per_second: float = 2.0,
    msg_len: int = 10,
    memory: int = 10,
    thresholds: dict[str, ThresholdStrategy] | None = None,
    threads: int | None = None,
    progress=None,
) -> list[dict]:
    """Character error rate across codebooks at equal molecules per character.

    budgets are expected molecule counts per transmitted character; each
    codebook's bit-1 budget is budget / E[ones](kind) rounded, the same
    equalization as fair_budgets. All kinds also share the character rate,
    so rows with equal budget are directly comparable. By default the
    run-length-limited kind resolves its threshold from pilots and the
    conventional kinds calibrate a fixed threshold on a training batch.

    Returns one row dict per (kind, budget); a row whose threshold cannot
    be resolved (for example pilots that cannot separate signal from
    interference at a tiny budget) carries an error tag instead of a CER.
    progress, when given, is called with each finished row.
    """
    builders = {"huffman": build_huffman, "proposed": build_proposed, "ita2": lambda d: ita2()}
    if thresholds is None:
        thresholds = {}
    default_thresholds: dict[str, ThresholdStrategy] = {
        "huffman": CalibratedThreshold(),
        "proposed": PilotThreshold(),
        "ita2": CalibratedThreshold(),
    }

    rows: list[dict] = []
    for kind in kinds:
        if kind not in builders:
            raise ValueError(f"unknown codebook kind {kind!r}")
        cb = builders[kind](dist)
        strategy = thresholds.get(kind, default_thresholds[kind])
        for budget in budgets:
            cfg = LinkConfig.build(
                codebook=cb,
                distribution=dist,
                params=params,
                molecules_per_one=_budget_share(dist, cb, budget),
                char_duration=1.0 / chars_per_second,
                threshold=strategy,
                msg_len=msg_len,
                memory=memory,
                trials=trials,
                master_seed=master_seed,
            )
            row = {
                "codebook": kind,
                "molecules_per_char": float(budget),
                "N_bit1": cfg.molecules_per_one,
                "t_s": cfg.profile.slot,
                "trials": trials,
                "seed": master_seed,
            }
            try:
                report = run_cer(cfg, threads=threads)
            except ValueError as exc:
                row.update(tau=None, cer=None, cer_stderr=None,
                           error=f"uncalibratable: {exc}")
            else:
                row.update(tau=report.tau, cer=report.cer,
                           cer_stderr=report.cer_stderr, error=None)
            rows.append(row)
            if progress is not None:
                progress(row)
    return rows
