
"""
fmpbem package
----------
Boundary element solvers for acoustic scattering by finite periodic arrays:
1. fmpbem.numerics - dense BEM, block Toeplitz PBEM and the fast multipole PBEM
2. fmpbem.runner   - scene-driven frequency sweeps (console script fmpbem-run)

See the README.md for detailed usage.
"""
