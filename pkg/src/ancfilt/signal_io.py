"""WAV/CSV I/O and deterministic synthetic two-sensor noise scenarios."""

from __future__ import annotations

import os
import tempfile
import wave
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

PCM_SCALE = 32768  # int16 full scale; asymmetric map, clipped on write

# Level conventions for synthetic scenarios: the clean source is normalized to
# this RMS before noise is added, and the whole triple is rescaled if the
# primary would clip on a 16-bit write.
CLEAN_RMS = 0.1
PEAK_LIMIT = 0.98

NOISE_KINDS = ("white", "ar1")
CLEAN_KINDS = ("sine_mix", "ar2")


class WavFormatError(ValueError):
    """WAV file exists but has a layout this tool does not handle."""

    def __init__(self, reason: str, detail: str):
        self.reason = reason
        super().__init__(f"{reason}: {detail}")


@dataclass(eq=False)
class Signal:
    """Mono audio buffer: float64 samples nominally in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int = 8000

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ValueError("empty signal")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("signal contains non-finite samples")
        if int(self.sample_rate) <= 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate}")
        self.sample_rate = int(self.sample_rate)

    def __len__(self) -> int:
        return self.samples.size


def read_wav(path) -> Signal:
    """Read a 16-bit PCM mono WAV file, mapping int samples to [-1, 1)."""
    with wave.open(str(path), "rb") as wav:
        if wav.getnchannels() != 1:
            raise WavFormatError("non-mono", f"{path} has {wav.getnchannels()} channels")
        if wav.getsampwidth() != 2:
            raise WavFormatError(
                "unsupported bit depth",
                f"{path} has {8 * wav.getsampwidth()}-bit samples, expected 16-bit",
            )
        rate = wav.getframerate()
        raw = wav.readframes(wav.getnframes())
    ints = np.frombuffer(raw, dtype="<i2")
    return Signal(ints.astype(np.float64) / PCM_SCALE, rate)


def write_wav(signal: Signal, path) -> int:
    """Write 16-bit PCM mono; samples outside [-1, 1) are clipped.

    Returns the number of clipped samples. The file appears atomically
    (temp file in the target directory, renamed on success).
    """
    if len(signal) == 0:
        raise ValueError("empty signal")
    scaled = np.rint(signal.samples * PCM_SCALE)
    clipped = int(np.count_nonzero((scaled > PCM_SCALE - 1) | (scaled < -PCM_SCALE)))
    ints = np.clip(scaled, -PCM_SCALE, PCM_SCALE - 1).astype("<i2")
    payload = ints.tobytes()

    def _emit(fh):
        with wave.open(fh, "wb") as wav:
            wav.setnchannels(1)
            wav.setsampwidth(2)
            wav.setframerate(signal.sample_rate)
            wav.writeframes(payload)

    _atomic_write(path, _emit, binary=True)
    return clipped


def write_csv(table: dict, path) -> None:
    """Write named columns as CSV: 12 significant digits, LF endings.

    Float cells use positional (non-scientific) notation; string cells pass
    through verbatim. All columns must have equal length.
    """
    names = list(table.keys())
    columns = [list(table[name]) for name in names]
    lengths = {len(col) for col in columns}
    if len(lengths) > 1:
        raise ValueError(f"ragged columns: lengths {sorted(lengths)}")
    rows = len(columns[0]) if columns else 0

    def _emit(fh):
        fh.write(",".join(names) + "\n")
        for i in range(rows):
            fh.write(",".join(_format_cell(col[i]) for col in columns) + "\n")

    _atomic_write(path, _emit, binary=False)


def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    v = float(value)
    if v == 0.0:
        v = 0.0  # normalize -0.0
    return np.format_float_positional(v, precision=12, unique=False, fractional=False, trim="-")


def _atomic_write(path, emit, binary: bool):
    path = str(path)
    directory = os.path.dirname(path) or "."
    mode = "wb" if binary else "w"
    kwargs = {} if binary else {"newline": "\n", "encoding": "utf-8"}
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with open(fd, mode, **kwargs) as fh:
            emit(fh)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a deterministic synthetic noise-cancellation scenario.

    A clean source is corrupted by noise shaped through an FIR channel; the
    raw noise is returned as the reference-sensor signal. Equal specs
    (including seed) produce bit-identical output.
    """

    channel_taps: tuple
    num_samples: int = 100_000
    noise_kind: str = "ar1"
    clean_kind: str = "ar2"
    input_snr_db: float = -10.218
    seed: int = 12345
    sample_rate: int = 8000
    noise_ar_coeff: float = 0.95

    def __post_init__(self):
        taps = tuple(float(t) for t in self.channel_taps)
        object.__setattr__(self, "channel_taps", taps)
        if len(taps) < 1 or not any(t != 0.0 for t in taps):
            raise ValueError("channel_taps needs at least one nonzero tap")
        if self.num_samples < 1:
            raise ValueError("num_samples must be at least 1")
        if self.noise_kind not in NOISE_KINDS:
            raise ValueError(f"noise_kind must be one of {NOISE_KINDS}, got {self.noise_kind!r}")
        if self.clean_kind not in CLEAN_KINDS:
            raise ValueError(f"clean_kind must be one of {CLEAN_KINDS}, got {self.clean_kind!r}")
        if not 0.0 <= self.noise_ar_coeff < 1.0:
            raise ValueError(f"noise_ar_coeff must lie in [0, 1), got {self.noise_ar_coeff}")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")


def default_channel(order: int) -> tuple:
    """Unit-norm FIR channel of the given order used by CLI synth defaults.

    Alternating-sign decay with a deliberately large final tap, so sweeps over
    the filter order see a clear penalty for undermodeling.
    """
    if order < 1:
        raise ValueError("channel order must be at least 1")
    taps = np.array([(-0.62) ** k for k in range(order)])
    taps[-1] = 0.5 * np.sign(taps[-1]) if order > 1 else taps[-1]
    return tuple(taps / np.linalg.norm(taps))


def synth_anc_scenario(spec: SynthSpec):
    """Generate (clean, primary, reference) signals for the given spec.

    primary = clean + channel_taps * reference (zero-prehistory convolution),
    with the noise gain chosen so the measured clean-to-noise power ratio in
    the primary equals input_snr_db exactly.
    """
    rng = np.random.default_rng(spec.seed)
    clean = _clean_source(spec, rng)
    clean *= CLEAN_RMS / _rms(clean)
    noise = _noise_source(spec, rng)
    taps = np.asarray(spec.channel_taps)

    shaped = lfilter(taps, [1.0], noise)
    gain = np.sqrt(_power(clean) / (_power(shaped) * 10.0 ** (spec.input_snr_db / 10.0)))
    reference = gain * noise

    # Recompute the shaped noise from the final reference so that
    # primary - clean is exactly the convolution of the channel with it.
    shaped = lfilter(taps, [1.0], reference)
    primary = clean + shaped
    peak = max(np.abs(primary).max(), np.abs(reference).max(), np.abs(clean).max())
    if peak > PEAK_LIMIT:
        scale = PEAK_LIMIT / peak
        clean = clean * scale
        reference = reference * scale
        shaped = lfilter(taps, [1.0], reference)
        primary = clean + shaped

    sr = spec.sample_rate
    return Signal(clean, sr), Signal(primary, sr), Signal(reference, sr)


def _clean_source(spec: SynthSpec, rng) -> np.ndarray:
    n = spec.num_samples
    if spec.clean_kind == "sine_mix":
        t = np.arange(n) / spec.sample_rate
        freqs = (440.0, 1223.0, 1801.0)
        amps = (1.0, 0.6, 0.35)
        phases = rng.uniform(0.0, 2.0 * np.pi, size=3)
        out = np.zeros(n)
        for f, a, ph in zip(freqs, amps, phases):
            out += a * np.sin(2.0 * np.pi * f * t + ph)
        return out
    # ar2: two conjugate poles at radius 0.95, angle pi/8
    radius, angle = 0.95, np.pi / 8.0
    a = [1.0, -2.0 * radius * np.cos(angle), radius * radius]
    return lfilter([1.0], a, rng.standard_normal(n))


def _noise_source(spec: SynthSpec, rng) -> np.ndarray:
    white = rng.standard_normal(spec.num_samples)
    if spec.noise_kind == "white":
        out = white
    else:
        out = lfilter([1.0], [1.0, -spec.noise_ar_coeff], white)
    return out / _rms(out)


def _power(x: np.ndarray) -> float:
    return float(np.mean(np.square(x)))


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(x))))
