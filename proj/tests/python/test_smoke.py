import math

import numpy as np

import ionsim


def test_golden_gradient_coupling():
    trap = ionsim.TrapPotential()
    trap.omega_x = 2 * math.pi * 2.02e6
    trap.omega_y = 2 * math.pi * 2.9e6
    trap.omega_z = 2 * math.pi * 1.0e6
    trap.species = ionsim.IonSpecies.ca40()

    state = ionsim.find_equilibrium(trap, 1)
    spectrum = ionsim.normal_modes(state, trap)
    field = ionsim.FieldModel.linear_gradient(
        np.array([0.0, 0.0, 3.5e-4]), 16.3, np.array([1.0, 0.0, 0.0])
    )
    cm = ionsim.effective_lamb_dicke(spectrum, field, state, trap.species)

    kx = int(np.argmin(np.abs(spectrum.frequencies - trap.omega_x)))
    eta = abs(cm.eta[kx, 0])
    assert abs(eta - 0.00126) < 0.05 * 0.00126


def test_critical_anisotropy():
    trap = ionsim.TrapPotential()
    trap.omega_x = 2 * math.pi * 2.0e6
    trap.omega_y = 2 * math.pi * 2.4e6
    trap.omega_z = 2 * math.pi * 0.5e6
    trap.species = ionsim.IonSpecies.ca40()
    r = ionsim.critical_anisotropy(trap, 3)
    assert abs(r.alpha_crit - 5.0 / 12.0) < 1e-4


def test_single_wire_field():
    wire = ionsim.WireSegment()
    wire.anchor = np.zeros(3)
    wire.direction = np.array([0.0, 0.0, 1.0])
    wire.current = 1.0
    model = ionsim.FieldModel.wire_model([wire], np.zeros(3))
    b = ionsim.field_at(model, np.array([100e-6, 0.0, 0.0]))
    assert abs(np.linalg.norm(b) - 2.0e-3) < 1e-8
    g = ionsim.magnitude_gradient(
        model, np.array([100e-6, 0.0, 0.0]), np.array([1.0, 0.0, 0.0])
    )
    assert abs(g + 20.0) < 1e-7


def test_zeeman_frequency():
    w = ionsim.zeeman_frequency(ionsim.IonSpecies.ca40(), 3.5e-4)
    assert abs(w - 2 * math.pi * 9.8078e6) < 1e-3 * w


def test_ground_state_carrier_flop():
    omega = 2 * math.pi * 50e3
    eta = 0.1
    drive = ionsim.DriveParams()
    drive.rabi_frequency = omega
    t = np.linspace(0.0, 60e-6, 121)
    signal = ionsim.flop_signal(
        ionsim.PhononDistribution.fock(0), eta, drive, ionsim.Transition.carrier, t
    )
    omega_eff = ionsim.transition_rabi(ionsim.Transition.carrier, 0, eta, omega)
    expected = np.sin(0.5 * omega_eff * t) ** 2
    assert np.max(np.abs(signal - expected)) < 1e-10
