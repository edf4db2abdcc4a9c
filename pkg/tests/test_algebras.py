import numpy as np
import pytest

from qichan import algebras as al
from qichan.catalog import PAULI_X, PAULI_Y, PAULI_Z
from qichan.errors import DimMismatch, NotAnAlgebra
from qichan.rand import generator, random_unitary


def two_by_two_plus_three_algebra():
    """(M_2 (x) 1_2) + M_3 acting on C^7."""
    basis = []
    for p in range(2):
        for q in range(2):
            e = np.zeros((2, 2), dtype=complex)
            e[p, q] = 1
            m = np.zeros((7, 7), dtype=complex)
            m[:4, :4] = np.kron(e, np.eye(2))
            basis.append(m)
    for p in range(3):
        for q in range(3):
            m = np.zeros((7, 7), dtype=complex)
            m[4 + p, 4 + q] = 1
            basis.append(m)
    return al.span_of(basis)


class TestGenerateStarAlgebra:
    def test_identity_only(self):
        alg = al.generate_star_algebra([np.eye(3, dtype=complex)])
        assert alg.dimension == 1
        assert alg.contains(np.eye(3, dtype=complex))

    def test_sigma_z_gives_diagonals(self):
        alg = al.generate_star_algebra([PAULI_Z])
        assert alg.dimension == 2
        assert alg.contains(np.diag([3.0, -7.0]).astype(complex))
        assert not alg.contains(PAULI_X)

    def test_two_paulis_generate_everything(self):
        alg = al.generate_star_algebra([PAULI_X, PAULI_Z])
        assert alg.dimension == 4
        # closure must have produced the product direction too
        assert alg.contains(PAULI_Y)
        assert alg.contains(PAULI_X @ PAULI_Z)

    def test_idempotent(self):
        alg = al.generate_star_algebra([PAULI_X, PAULI_Z])
        again = al.generate_star_algebra(list(alg.basis))
        assert al.spans_equal(alg, again)

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            al.generate_star_algebra([np.eye(2, dtype=complex), np.eye(3, dtype=complex)])


class TestCommutant:
    def test_of_identity_is_everything(self):
        assert al.commutant([np.eye(3, dtype=complex)]).dimension == 9

    def test_of_full_matrix_algebra_is_scalars(self):
        full = al.generate_star_algebra([PAULI_X, PAULI_Z])
        comm = al.commutant(list(full.basis))
        assert comm.dimension == 1
        assert comm.contains(np.eye(2, dtype=complex))

    def test_commutes_with_inputs(self):
        rng = generator(0)
        ops = [random_unitary(rng, 4) for _ in range(2)]
        comm = al.commutant(ops)
        for b in comm.basis:
            for s in ops:
                assert al.op_norm(b @ s - s @ b) < 1e-8

    @pytest.mark.parametrize("seed", range(10))
    def test_double_commutant(self, seed):
        rng = generator(seed)
        d = int(rng.integers(2, 7))
        gens = [
            rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            for _ in range(int(rng.integers(1, 3)))
        ]
        generated = al.generate_star_algebra(gens)
        double = al.commutant(list(al.commutant(gens).basis))
        assert al.spans_equal(generated, double, 1e-7)


class TestCenter:
    def test_full_algebra_center_trivial(self):
        full = al.generate_star_algebra([PAULI_X, PAULI_Z])
        assert al.center(full).dimension == 1

    def test_diagonal_algebra_is_its_own_center(self):
        diag = al.generate_star_algebra([np.diag([1.0, 2.0, 3.0]).astype(complex)])
        z = al.center(diag)
        assert al.spans_equal(z, diag)

    def test_hybrid_center_is_two_dimensional(self):
        alg = two_by_two_plus_three_algebra()
        z = al.center(alg)
        assert z.dimension == 2
        p1 = np.zeros((7, 7), dtype=complex)
        p1[:4, :4] = np.eye(4)
        p2 = np.eye(7, dtype=complex) - p1
        assert z.contains(p1) and z.contains(p2)

    def test_rejects_non_algebra(self):
        e01 = np.zeros((2, 2), dtype=complex)
        e01[0, 1] = 1
        span = al.span_of([np.eye(2, dtype=complex), e01, e01.conj().T])
        with pytest.raises(NotAnAlgebra):
            al.center(span)


class TestStructureDecompose:
    def test_full_matrix_algebra(self):
        m3 = al.generate_star_algebra(
            [np.diag([1.0, 2, 3]).astype(complex),
             np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=complex)]
        )
        st = al.structure_decompose(m3)
        assert st.block_dims == ((3, 1),)

    def test_diagonal_algebra(self):
        diag = al.generate_star_algebra([np.diag([1.0, 2, 3]).astype(complex)])
        st = al.structure_decompose(diag)
        assert st.block_dims == ((1, 1), (1, 1), (1, 1))

    def test_hybrid_blocks(self):
        st = al.structure_decompose(two_by_two_plus_three_algebra())
        assert set(st.block_dims) == {(2, 2), (3, 1)}

    def test_consistency_counts(self):
        st = al.structure_decompose(two_by_two_plus_three_algebra())
        assert sum(n * n for n, _ in st.block_dims) == st.dimension
        assert sum(n * m for n, m in st.block_dims) == st.dim
        assert al.block_pattern_residual(st) < 1e-7

    def test_projector_partition(self):
        st = al.structure_decompose(two_by_two_plus_three_algebra())
        total = sum(st.central_projectors)
        assert al.op_norm(total - np.eye(7)) < 1e-8
        for i, p in enumerate(st.central_projectors):
            for j, q in enumerate(st.central_projectors):
                expected = p if i == j else np.zeros_like(p)
                assert al.op_norm(p @ q - expected) < 1e-8

    @pytest.mark.parametrize("seed", [1, 2, 17, 101])
    def test_seed_independent_blocks(self, seed):
        st = al.structure_decompose(two_by_two_plus_three_algebra(), seed=seed)
        assert sorted(st.block_dims) == [(2, 2), (3, 1)]

    def test_rotated_algebra(self):
        # conjugating by a unitary must not change the block structure
        u = random_unitary(generator(3), 7)
        rotated = al.span_of([u @ b @ u.conj().T for b in two_by_two_plus_three_algebra().basis])
        st = al.structure_decompose(rotated)
        assert set(st.block_dims) == {(2, 2), (3, 1)}
        assert al.block_pattern_residual(st) < 1e-7

    def test_basis_change_unitary(self):
        st = al.structure_decompose(two_by_two_plus_three_algebra())
        u = st.basis_change
        assert al.op_norm(u.conj().T @ u - np.eye(7)) < 1e-8


class TestIntersectContains:
    def test_intersect_with_full_algebra(self):
        diag = al.generate_star_algebra([np.diag([1.0, -1.0]).astype(complex)])
        full = al.generate_star_algebra([PAULI_X, PAULI_Z])
        inter = al.intersect(diag, full)
        assert al.spans_equal(inter, diag)

    def test_intersect_projection_oracle(self):
        diag = al.generate_star_algebra([np.diag([1.0, -1.0]).astype(complex)])
        other = al.span_of([np.eye(2, dtype=complex), PAULI_X])
        inter = al.intersect(diag, other)
        assert inter.dimension == 1
        assert inter.contains(np.eye(2, dtype=complex))

    def test_contains(self):
        diag = al.generate_star_algebra([np.diag([1.0, -1.0]).astype(complex)])
        assert al.contains(diag, PAULI_Z)
        assert not al.contains(diag, PAULI_X)

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            al.intersect(
                al.span_of([np.eye(2, dtype=complex)]), al.span_of([np.eye(3, dtype=complex)])
            )


class TestCommutativityOfCenter:
    @pytest.mark.parametrize("seed", range(5))
    def test_center_is_commutative(self, seed):
        rng = generator(seed)
        d = int(rng.integers(3, 7))
        gens = [rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))]
        alg = al.generate_star_algebra(gens)
        z = al.center(alg)
        for i in range(z.dimension):
            for j in range(z.dimension):
                a, b = z.basis[i], z.basis[j]
                assert al.op_norm(a @ b - b @ a) < 1e-8
