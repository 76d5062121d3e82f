"""Hypothesis strategies shared by the test modules."""

from hypothesis import strategies as st

from holonomy_instantons.exterior import Form, GeneratorSet, Quaternion

GENS6 = GeneratorSet.of([f"e{k}" for k in range(1, 7)])

reals = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False)
quaternions = st.builds(Quaternion, reals, reals, reals, reals)
real_quaternions = st.builds(Quaternion, reals)
# O(1) coefficients, the scale at which relative residuals are meaningful for cubic identities
units = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False, allow_infinity=False)
unit_quaternions_coeffs = st.builds(Quaternion, units, units, units, units)


def forms(degree: int, gens: GeneratorSet = GENS6, coeffs=quaternions):
    masks = [m for m in range(1 << len(gens)) if bin(m).count("1") == degree]
    return st.dictionaries(st.sampled_from(masks), coeffs, max_size=len(masks)).map(
        lambda terms: Form(gens, degree, terms))
