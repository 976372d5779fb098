import math

import numpy as np
import pytest

from memsnn.errors import ConfigError
from memsnn.plasticity import (FrameClock, SlotWaveform, TraceParams, TraceState,
                               compose_post_port, compose_pre_port,
                               differential_frame, pwm_encode, trace_step)

TP = TraceParams(v_p=2.0, tau=0.045)
SLOT = 0.01
VCC = 2.0


def test_clock_slot_and_frame_advance():
    clk = FrameClock(base_freq=100.0)
    assert clk.slot_width == pytest.approx(0.01)
    assert clk.frame_width == pytest.approx(0.03)
    seen = []
    for _ in range(7):
        seen.append((clk.frame, clk.slot))
        clk.tick()
    assert seen == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2), (2, 0)]


def test_trace_held_while_spiking():
    s = trace_step(TP, TraceState(v_cp=0.3), owner_spiking=True, dt=0.03)
    assert s.v_cp == TP.v_p
    assert s.switch_on


def test_trace_exponential_decay():
    s = trace_step(TP, TraceState(v_cp=TP.v_p), owner_spiking=False, dt=TP.tau)
    assert s.v_cp == pytest.approx(TP.v_p / math.e, rel=1e-12)


def test_trace_zero_stays_zero():
    s = trace_step(TP, TraceState(v_cp=0.0), owner_spiking=False, dt=1.0)
    assert s.v_cp == 0.0


def test_trace_monotone_between_spikes():
    s = TraceState(v_cp=TP.v_p)
    prev = s.v_cp
    for _ in range(50):
        s = trace_step(TP, s, owner_spiking=False, dt=0.01)
        assert 0.0 <= s.v_cp < prev
        prev = s.v_cp


def test_pwm_endpoints():
    assert pwm_encode(TP, TP.v_p, SLOT, False) == SLOT
    assert pwm_encode(TP, 0.0, SLOT, False) == 0.0
    assert pwm_encode(TP, 0.123, SLOT, True) == SLOT  # switch held on


def test_pwm_width_at_one_tau():
    width = pwm_encode(TP, TP.v_p / math.e, SLOT, False)
    assert width == pytest.approx(SLOT / math.e, rel=1e-12)
    assert width == pytest.approx(3.679e-3, abs=1e-6)


def test_pwm_exact_proportionality():
    rng = np.random.default_rng(5)
    for v in rng.uniform(0.0, TP.v_p, 100):
        width = pwm_encode(TP, v, SLOT, False)
        assert width / SLOT == pytest.approx(v / TP.v_p, rel=1e-12, abs=1e-15)


def test_pre_port_firing_frame():
    s0, s1, s2 = compose_pre_port(True, SLOT, VCC, SLOT)
    assert (s0.level, s0.active_width) == (VCC, SLOT)
    assert (s1.level, s1.active_width) == (VCC, SLOT)
    assert (s2.level, s2.active_width) == (-VCC, SLOT)


def test_pre_port_trace_only():
    w = 0.004
    s0, s1, s2 = compose_pre_port(False, w, VCC, SLOT)
    assert s0.active_width == 0.0
    assert (s1.level, s1.active_width) == (VCC, w)
    assert s2.active_width == 0.0


def test_pre_port_idle():
    waves = compose_pre_port(False, 0.0, VCC, SLOT)
    assert all(w.active_width == 0.0 for w in waves)


def test_post_port_firing_frame():
    s0, s1, s2 = compose_post_port(True, SLOT, VCC, SLOT)
    assert s0.active_width == 0.0  # slot 0 grounded: no backward spike
    assert (s1.level, s1.active_width) == (-VCC, SLOT)
    assert (s2.level, s2.active_width) == (VCC, SLOT)


def test_post_port_trace_only():
    w = 0.0037
    s0, s1, s2 = compose_post_port(False, w, VCC, SLOT)
    assert s0.active_width == 0.0
    assert s1.active_width == 0.0
    assert (s2.level, s2.active_width) == (VCC, w)


def test_differential_ltp_overlap():
    # sending side fired last frame (trace width w), receiving side fires now
    w = 0.0072
    a = compose_pre_port(False, w, VCC, SLOT)
    b = compose_post_port(True, SLOT, VCC, SLOT)
    slots = differential_frame(a, b, SLOT)
    assert slots[0] == []
    assert slots[1][0] == (pytest.approx(w), pytest.approx(2 * VCC))
    assert slots[1][1] == (pytest.approx(SLOT - w), pytest.approx(VCC))
    # depressing slot carries only the receiver's full-width PWM at -v_cc
    assert slots[2] == [(pytest.approx(SLOT), pytest.approx(-VCC))]


def test_differential_ltd_overlap():
    w = 0.0028
    a = compose_pre_port(True, SLOT, VCC, SLOT)
    b = compose_post_port(False, w, VCC, SLOT)
    slots = differential_frame(a, b, SLOT)
    assert slots[0] == [(pytest.approx(SLOT), pytest.approx(VCC))]
    assert slots[1] == [(pytest.approx(SLOT), pytest.approx(VCC))]
    assert slots[2][0] == (pytest.approx(w), pytest.approx(-2 * VCC))
    assert slots[2][1] == (pytest.approx(SLOT - w), pytest.approx(-VCC))


def test_differential_same_frame_cancellation_shape():
    a = compose_pre_port(True, SLOT, VCC, SLOT)
    b = compose_post_port(True, SLOT, VCC, SLOT)
    slots = differential_frame(a, b, SLOT)
    assert slots[1] == [(pytest.approx(SLOT), pytest.approx(2 * VCC))]
    assert slots[2] == [(pytest.approx(SLOT), pytest.approx(-2 * VCC))]


def test_weak_only_frames_never_exceed_rail():
    rng = np.random.default_rng(9)
    for _ in range(200):
        wa = float(rng.uniform(0.0, SLOT))
        wb = float(rng.uniform(0.0, SLOT))
        # neither side fires: only trace PWMs are active
        a = compose_pre_port(False, wa, VCC, SLOT)
        b = compose_post_port(False, wb, VCC, SLOT)
        for segs in differential_frame(a, b, SLOT):
            for _, v in segs:
                assert abs(v) <= VCC + 1e-15


def test_frame_debug_rows():
    from memsnn.plasticity import frame_debug_rows
    w = 0.0072
    a = compose_pre_port(False, w, VCC, SLOT)
    b = compose_post_port(True, SLOT, VCC, SLOT)
    rows = frame_debug_rows(7, a, b, SLOT, VCC)
    assert [r[:2] for r in rows] == [(7, 0), (7, 1), (7, 2)]
    # slot 1 carries the strong overlap for exactly the PWM width
    assert rows[1][2:6] == (VCC, w, -VCC, SLOT)
    assert rows[1][6] == pytest.approx(w)
    assert rows[0][6] == 0.0 and rows[2][6] == 0.0


def test_trace_params_validation():
    with pytest.raises(ConfigError):
        TraceParams(v_p=0.0).validate()
    with pytest.raises(ConfigError):
        TraceParams(tau=-1.0).validate()
