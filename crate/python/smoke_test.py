"""Smoke test for the magnon_bath extension module.

Build and install first:  maturin develop -m crates/python/Cargo.toml --release
Then run:                 python python/smoke_test.py
"""

import math

import magnon_bath as mb


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    fig1 = mb.ModelParams(d=1, J=0.5, S=1, gamma_z=1, h=8, omega0=2, g=1)
    assert fig1.spectrum_bounds() == (8.0, 12.0, 10.0)
    assert close(mb.sigma_ret(fig1, 10.0).real, 2.0, 1e-12)
    assert len(mb.find_bound_states(fig1)) == 1
    assert len(mb.find_bound_states(fig1.with_omega0(12.0))) == 2
    assert close(mb.sum_rule(fig1), 1.0, 1e-6)

    fig2 = mb.ModelParams.chain(0.1, 3.0, 1.0)
    exact = mb.ExactDynamics(fig2, 20.0)
    assert exact.amplitude(0.0) == 1 + 0j
    oracle = mb.FiniteLattice(fig2, 1024)
    times = [0.5 * i for i in range(41)]
    worst = max(abs(a - b) for a, b in zip(exact.amplitudes(times), oracle.amplitudes(times)))
    assert worst < 1e-9, worst
    rho11, rho12 = exact.evolve(1 / math.sqrt(2), 1 / math.sqrt(2), 3.0)
    assert 0.0 <= rho11 <= 1.0 and abs(rho12) ** 2 <= rho11 * (1 - rho11) + 1e-12

    weak = mb.ModelParams.chain(1.0, 3.0, 0.1)
    kappa, xi, divergent = mb.markov_limits(weak)
    assert not divergent and close(kappa, 0.02 * math.sqrt(3.0), 1e-12)
    dyn = mb.WeakDynamics(weak, [0.0, 1.0, 10.0], temperature=0.0)
    assert dyn.evolve()[0][0] == 1.0

    fig17 = mb.ModelParams.chain(3.0, 2.0, 1.0)
    for kappa_eff, _ in mb.effective_rates(fig17, [0.1, 1.0, 5.0, 20.0]):
        assert kappa_eff >= 0.0

    gamma, delta, tau_d = mb.short_time(fig2)
    assert close(tau_d, 1 / math.sqrt(2), 1e-15) and delta == 0.0

    try:
        mb.ModelParams(d=4)
    except ValueError as err:
        assert "dimension" in str(err)
    else:
        raise AssertionError("d=4 must be rejected")

    print("magnon_bath smoke test passed:", fig1, f"|phi(20)|^2 = {abs(exact.amplitude(20.0)) ** 2:.6f}")


if __name__ == "__main__":
    main()
