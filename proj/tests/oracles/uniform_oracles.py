"""High-precision reference values for the uniform-on-[pi, v_bar] economy.

Closed forms come from hand calculus (substitution s = (v_bar - v)/(v_bar - pi));
nested quadratures are done with mpmath at 30 digits as an independent check.
Run: python3 tests/oracles/uniform_oracles.py
"""
from mpmath import mp, mpf, exp, log, quad

mp.dps = 30
PI, VBAR = mpf("0.1"), mpf(1)
W = VBAR - PI


def cutoff(M):
    return VBAR - W * log(M) / (M - 1)


def F(u):
    return (u - PI) / W


def q_tilde(v, M):
    # generic definition, evaluated by quadrature
    vm = cutoff(M)
    if v < vm:
        return mpf(0)
    inner = quad(lambda u: exp(-(M - 1) * (F(u) - F(v))), [v, VBAR])
    return (W * exp(-(M - 1) * (1 - F(v))) - inner) / 2


def int_dF(g, a, b):
    return quad(lambda x: g(x) / W, [a, b])


def report(M=2, L=100, N=1000, theta=10):
    vm = cutoff(M)
    Q = lambda x: q_tilde(x, M)
    print(f"M={M} cutoff={vm}")
    print(" Qtilde(0.7)", Q(mpf("0.7")), " closed", W / 2 * (2 * exp(-(1 - mpf("0.7")) / W) - 1) if M == 2 else "")
    print(" int_{vm}^{0.7} Q^2 dx", quad(lambda x: Q(x) ** 2, [vm, mpf("0.7")]))
    I2_07 = int_dF(lambda x: Q(x) ** 2, vm, mpf("0.7"))
    print(" fee(L, 0.7)", 2 * L * (M - 1) * I2_07)
    I1 = int_dF(Q, vm, VBAR)
    print(" aggregate quad", L * M * I1, " closed", L * M * (vm - PI) / (2 * (M - 1)))
    I2 = int_dF(lambda x: Q(x) ** 2, vm, VBAR)
    cross = (vm - PI) ** 2 / (4 * (M - 1))
    SM = I2 + cross
    print(" I2", I2, " cross", cross, " S_M", SM)
    Lstar = PI * N / (M * SM) - theta
    lg = log(M)
    br = (M - 1) * (3 * M - 5) - 2 * (2 * M - 3) * lg + 2 * lg ** 2
    print(" L*", Lstar, " eq23", 8 * PI * N * (M - 1) ** 3 / (M * W ** 2 * br) - theta)
    Ih = int_dF(lambda x: Q(x) ** 2 * (1 - 2 * (M - 1) * (1 - F(x))), vm, VBAR)
    print(" H", Lstar * Ih)
    print(" end price", M * (vm - PI) / (M - 1), " active", M * (1 - F(vm)))


if __name__ == "__main__":
    report(2)
    print("limit", 8 * PI * 1000 / (3 * W ** 2) - 10)
    for M in (3, 5, 10, 50, 200):
        print(M, cutoff(M))
