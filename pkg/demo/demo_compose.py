from bc_compose import BoundaryUnitary
from bc_compose import build_cavity
from bc_compose import compose
from bc_compose import decompose
from bc_compose.config import settings
from bc_compose.interval_cavity import gaussian_state
from bc_compose.interval_cavity import spectrum
from bc_compose.trotter_engine import convergence_sweep

print(settings.tolerances)
print(settings["defaults"]["grid"])

u1 = BoundaryUnitary.robin(0.0)
u2 = BoundaryUnitary.robin(2.0)
w = compose(u1, u2)
print(w.matrix)
print(decompose(w).K)

print(compose(BoundaryUnitary.dirichlet(), BoundaryUnitary.robin(1.0)).matrix)
print(compose(BoundaryUnitary.periodic(), BoundaryUnitary.neumann()).matrix)

cavity = build_cavity(w, cells=128)
print(spectrum(cavity, 3))

c1 = build_cavity(u1, cells=16)
c2 = build_cavity(u2, cells=16)
cw = build_cavity(w, cells=16)
report = convergence_sweep(gaussian_state(cw), 0.1, [1024, 2048, 4096], c1, c2, cw)
print(report.pointwise_errors)
print(report.fitted_order)
