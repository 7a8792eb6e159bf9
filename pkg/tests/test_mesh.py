"""
Mesh generation, pore carving and periodic pairing tests
"""

import numpy as np
import pytest

from exceptions import InvalidParameterError, PoreTouchesBoundaryError, UnmatchedBoundaryNodeError
from fem.elements import element_volumes
from fem.mesh import EDGES, Mesh, PoreSpec, build_rve_mesh, carve_pores, generate_cube_mesh
from fem.periodic import PeriodicPairing, build_periodic_pairing


def test_single_cube_counts(unit_cube):
    """Test one hexahedron gives 6 Tet10 on 27 nodes"""
    assert unit_cube.element_count == 6
    assert unit_cube.node_count == 27


@pytest.mark.parametrize("divisions, elements", [(2, 48), (4, 384)])
def test_element_count_scales_with_divisions(divisions, elements):
    """Test 6 tets per hexahedron"""
    assert generate_cube_mesh(6.0, divisions).element_count == elements


def test_connectivity_is_valid(cube_mesh):
    """Test indices are in range and distinct per element"""
    assert cube_mesh.elements.max() < cube_mesh.node_count
    for element in cube_mesh.elements:
        assert len(set(element.tolist())) == 10


def test_midside_nodes_at_edge_means(cube_mesh):
    """Test straight edges: midnodes at the mean of their corners"""
    X = cube_mesh.nodes[cube_mesh.elements]
    for local, (a, b) in enumerate(EDGES):
        np.testing.assert_allclose(X[:, 4 + local], 0.5 * (X[:, a] + X[:, b]), atol=1e-12)


def test_jacobians_positive_and_volume_exact():
    """Test every element has positive volume and the cube volume is recovered"""
    mesh = generate_cube_mesh(6.0, 4)
    volumes = element_volumes(mesh.nodes[mesh.elements])
    assert np.all(volumes > 0.0)
    assert volumes.sum() == pytest.approx(216.0, rel=1e-12)


def test_generation_is_deterministic():
    """Test identical inputs give identical arrays"""
    first, second = generate_cube_mesh(6.0, 3), generate_cube_mesh(6.0, 3)
    assert np.array_equal(first.nodes, second.nodes)
    assert np.array_equal(first.elements, second.elements)


def test_invalid_divisions_rejected():
    """Test zero divisions is a precondition violation"""
    with pytest.raises(InvalidParameterError):
        generate_cube_mesh(6.0, 0)


def test_carving_default_pores():
    """Test the two default pores remove roughly two sphere volumes"""
    mesh = generate_cube_mesh(6.0, 4)
    carved = build_rve_mesh(6.0, 4, [(2.0, 2.0, 2.0), (4.0, 4.0, 4.0)], 1.5)
    assert 0 < carved.element_count < mesh.element_count

    solid = element_volumes(carved.nodes[carved.elements]).sum()
    void = 216.0 - solid
    expected = 2.0 * 4.0 / 3.0 * np.pi * 1.5**3
    assert abs(void - expected) < 0.4 * expected


def test_carving_renumbers_contiguously(porous_small):
    """Test the centre cube is removed and every node is used"""
    assert porous_small.element_count == 156
    assert porous_small.node_count == 342
    assert np.array_equal(np.unique(porous_small.elements), np.arange(porous_small.node_count))


def test_carving_without_pores_returns_same_mesh(cube_mesh):
    """Test an empty pore list leaves the mesh unchanged"""
    assert carve_pores(cube_mesh, PoreSpec()) is cube_mesh


def test_pore_on_corner_rejected(cube_mesh):
    """Test a pore touching the outer surface is rejected"""
    with pytest.raises(PoreTouchesBoundaryError):
        carve_pores(cube_mesh, PoreSpec(centers=[(0.0, 0.0, 0.0)], radius=1.0))


def test_mesh_dict_round_trip(unit_cube):
    """Test the JSON form restores the mesh"""
    restored = Mesh.from_dict(unit_cube.to_dict())
    assert np.array_equal(restored.nodes, unit_cube.nodes)
    assert np.array_equal(restored.elements, unit_cube.elements)


def test_pairing_dimension_single_cube(unit_cube):
    """Test D = 3 x (7 masters besides the pinned corner)"""
    pairing = build_periodic_pairing(unit_cube)
    assert pairing.dof_count == 21
    assert np.allclose(unit_cube.nodes[pairing.pinned_node], 0.0)
    np.testing.assert_array_equal(pairing.pinned_dof_block, 3 * pairing.pinned_node + np.arange(3))


def test_pairing_dimension_porous(porous_pairing):
    """Test D of the small porous RVE"""
    assert porous_pairing.dof_count == 642


def test_pairing_matches_translated_coordinates(cube_mesh):
    """Test partners coincide modulo one edge length per axis"""
    pairing = build_periodic_pairing(cube_mesh)
    X = cube_mesh.nodes
    for node, master in enumerate(pairing.master_of):
        shifted = np.where(X[node] >= 6.0 - 1e-9, X[node] - 6.0, X[node])
        np.testing.assert_allclose(X[master], shifted, atol=6e-9)


def test_face_and_corner_partners(cube_mesh):
    """Test (6, y, z) maps to (0, y, z) and (6, 6, 6) collapses to the origin"""
    pairing = build_periodic_pairing(cube_mesh)
    X = cube_mesh.nodes
    face = int(np.flatnonzero(np.all(np.isclose(X, [6.0, 1.5, 3.0]), axis=1))[0])
    corner = int(np.flatnonzero(np.all(np.isclose(X, [6.0, 6.0, 6.0]), axis=1))[0])
    np.testing.assert_allclose(X[pairing.master_of[face]], [0.0, 1.5, 3.0])
    assert pairing.master_of[corner] == pairing.pinned_node


def test_pairing_sets_are_consistent(cube_mesh):
    """Test disjoint dof sets, interior dofs independent, no dependent partner targets"""
    pairing = build_periodic_pairing(cube_mesh)
    independent = set(pairing.independent_dofs.tolist())
    dependent = set(pairing.dependent_dofs.tolist())
    pinned = set(pairing.pinned_dof_block.tolist())
    assert not independent & dependent
    assert independent | dependent | pinned == set(range(cube_mesh.dof_count))
    assert not set(pairing.partner_dofs.tolist()) & dependent

    interior = np.flatnonzero(~cube_mesh.boundary_mask())
    for node in interior:
        assert {3 * node, 3 * node + 1, 3 * node + 2} <= independent


def test_transfer_matrix_matches_expand(porous_pairing, rng):
    """Test T u equals the gather-based expansion and restrict inverts it"""
    u = rng.standard_normal(porous_pairing.dof_count)
    T = porous_pairing.transfer_matrix()
    np.testing.assert_allclose(T @ u, porous_pairing.expand(u))
    np.testing.assert_allclose(porous_pairing.restrict(porous_pairing.expand(u)), u)
    assert np.all(porous_pairing.expand(u)[porous_pairing.pinned_dof_block] == 0.0)


def test_pairing_from_master_map(porous_pairing):
    """Test the stored node map rebuilds the same dof sets"""
    data = porous_pairing.to_dict()
    rebuilt = PeriodicPairing.from_master_map(np.asarray(data["master_of"]), data["pinned_node"])
    np.testing.assert_array_equal(rebuilt.independent_dofs, porous_pairing.independent_dofs)
    np.testing.assert_array_equal(rebuilt.full_to_reduced, porous_pairing.full_to_reduced)


def test_unmatched_plus_face_node(cube_mesh):
    """Test a displaced plus-face node has no partner"""
    nodes = cube_mesh.nodes.copy()
    face = int(np.flatnonzero(np.all(np.isclose(nodes, [6.0, 1.5, 3.0]), axis=1))[0])
    nodes[face, 1] += 0.1
    broken = Mesh(nodes=nodes, elements=cube_mesh.elements, edge_length=6.0)
    with pytest.raises(UnmatchedBoundaryNodeError):
        build_periodic_pairing(broken)
