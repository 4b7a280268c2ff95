import math

import numpy as np
import pytest

from losses.loss_types import AblationFlags, Batch, LossReport, LossWeights
from losses.orthogonal_losses import PenaltyEntry, l_orth, l_pb, penalty_set
from losses.prototype_losses import dce_loss, faem_terms, l_f, l_faem, l_fb, smooth_norm_loss, smooth_norm_rows
from losses.total_loss import total_loss
from models.dual_branch_model import BRANCH_A, BRANCH_B, init_model
from ndnum import functional as F
from ndnum.tensor import Tensor
from utils.errors import ConfigError, DataError, DimensionError


class TestDce:
    @pytest.mark.parametrize('n', [2, 5, 13])
    def test_uniform_logits(self, n):
        loss = dce_loss(Tensor(np.zeros((3, n))), [0, 1, 1])
        assert loss.item() == pytest.approx(math.log(n))

    def test_two_class_hand_value(self):
        assert dce_loss(Tensor([[1.0, 0.0]]), [0]).item() == pytest.approx(0.313262, abs=1e-6)

    def test_confident_correct_prediction_is_near_zero(self):
        assert dce_loss(Tensor([[50.0, 0.0]]), [0]).item() == pytest.approx(0.0, abs=1e-12)

    def test_label_out_of_range(self):
        with pytest.raises(DataError):
            dce_loss(Tensor(np.zeros((2, 3))), [0, 3])

    def test_label_count_mismatch(self):
        with pytest.raises(DimensionError):
            dce_loss(Tensor(np.zeros((2, 3))), [0])


class TestSmoothNorm:
    @pytest.mark.parametrize('u, expected', [
        ([0.0, 0.0], 0.0),
        ([0.3, -0.4], 0.25),
        ([1.0, 1.0], 1.5),
        ([2.0, 0.0], 1.5),
    ])
    def test_hand_values(self, u, expected):
        assert smooth_norm_loss(Tensor(u)).item() == pytest.approx(expected)

    def test_rows_match_single_vector_form(self, rng):
        u = rng.standard_normal((6, 3)) * 0.4
        rows = smooth_norm_rows(Tensor(u)).data
        expected = [smooth_norm_loss(Tensor(row)).item() for row in u]
        np.testing.assert_allclose(rows, expected)

    def test_gradient_is_zero_at_origin(self):
        u = Tensor([[0.0, 0.0]], requires_grad=True)
        F.sum(smooth_norm_rows(u)).backward()
        np.testing.assert_array_equal(u.grad, [[0.0, 0.0]])

    @pytest.mark.parametrize('u', [[1.0, 0.0], [0.5, 0.5], [0.25, -0.75]])
    def test_unit_l1_norm_uses_the_l1_regime(self, u):
        single = Tensor(u, requires_grad=True)
        smooth_norm_loss(single).backward()
        assert smooth_norm_loss(Tensor(u)).item() == pytest.approx(0.5)
        np.testing.assert_allclose(single.grad, np.sign(u))

        rows = Tensor([u], requires_grad=True)
        F.sum(smooth_norm_rows(rows)).backward()
        assert smooth_norm_rows(Tensor([u])).data[0] == pytest.approx(0.5)
        np.testing.assert_allclose(rows.grad, [np.sign(u)])

    def test_just_inside_the_unit_l1_ball_uses_half_l2(self):
        u = [0.5, 0.4999]
        assert smooth_norm_loss(Tensor(u)).item() == pytest.approx(0.5 * np.hypot(*u))


class TestFeatureActivation:
    def test_l_f_zero_when_features_sit_on_prototypes(self):
        p = Tensor([[1.0, 0.0], [0.0, 1.0]])
        z = Tensor([[0.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
        assert l_f(z, [1, 0, 1], p).item() == 0.0

    def test_l_f_averages_per_sample(self):
        p = Tensor([[0.0, 0.0], [0.0, 0.0]])
        z = Tensor([[0.3, -0.4], [2.0, 0.0]])
        assert l_f(z, [0, 1], p).item() == pytest.approx((0.25 + 1.5) / 2)

    def test_l_f_width_mismatch(self):
        with pytest.raises(DimensionError):
            l_f(Tensor(np.ones((2, 3))), [0, 1], Tensor(np.ones((2, 2))))

    def test_l_fb_empty_background(self):
        assert l_fb(Tensor(np.zeros((0, 4))), Tensor(np.zeros(4))).item() == 0.0

    def test_l_fb_pulls_toward_center(self):
        z_b = Tensor([[1.0, 1.0]])
        assert l_fb(z_b, Tensor([1.0, 1.0])).item() == 0.0
        assert l_fb(z_b, Tensor([0.0, 0.0])).item() == pytest.approx(1.5)

    def test_faem_reduces_to_dce_without_activation_terms(self, tiny_model, tiny_batch):
        weights = LossWeights(lam=0.0, gamma=0.0)
        terms = faem_terms(tiny_model.branch_a, tiny_batch)
        assert l_faem(tiny_model.branch_a, tiny_batch, weights).item() == pytest.approx(terms.l_eps.item())

    def test_faem_combination(self, tiny_model, tiny_batch):
        weights = LossWeights(lam=0.5, gamma=2.0)
        terms = faem_terms(tiny_model.branch_a, tiny_batch)
        expected = terms.l_eps.item() + 0.5 * terms.l_f.item() + 2.0 * terms.l_fb.item()
        assert l_faem(tiny_model.branch_a, tiny_batch, weights).item() == pytest.approx(expected)


class TestOrthogonality:
    def test_orthogonal_prototypes(self):
        p_a = Tensor([[1.0, 0.0], [0.0, 1.0]])
        p_b = Tensor([[0.0, 3.0], [2.0, 0.0]])
        assert l_orth(p_a, p_b).item() == 0.0

    def test_identical_unit_prototypes(self):
        p = Tensor([[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]])
        assert l_orth(p, p).item() == pytest.approx(1.0)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            l_orth(Tensor(np.ones((2, 3))), Tensor(np.ones((3, 3))))

    def test_invariant_under_row_permutation(self, rng):
        p_a, p_b = rng.standard_normal((5, 3)), rng.standard_normal((5, 3))
        order = rng.permutation(5)
        assert l_orth(Tensor(p_a[order]), Tensor(p_b[order])).item() == pytest.approx(
            l_orth(Tensor(p_a), Tensor(p_b)).item(), rel=1e-12)


class TestPenaltySet:
    def test_agreeing_rows_penalize_larger_similarity(self):
        sim_a = np.array([[3.0, 1.0], [0.0, 2.0], [5.0, 1.0]])
        sim_b = np.array([[4.0, 0.0], [0.0, 1.0], [0.0, 9.0]])
        assert penalty_set(sim_a, sim_b) == [
            PenaltyEntry(0, BRANCH_B, 0),
            PenaltyEntry(1, BRANCH_A, 1),
        ]

    def test_tie_goes_to_branch_a(self):
        sim = np.array([[2.0, 1.0]])
        assert penalty_set(sim, sim.copy()) == [PenaltyEntry(0, BRANCH_A, 0)]

    def test_empty_background(self):
        assert penalty_set(np.zeros((0, 3)), np.zeros((0, 3))) == []

    def test_l_pb_empty_selection_is_zero(self):
        z = Tensor(np.ones((2, 2)))
        assert l_pb([], z, z, z, z).item() == 0.0

    def test_l_pb_averages_selected_similarities(self):
        z_a = Tensor([[1.0, 0.0], [0.0, 2.0]])
        z_b = Tensor([[3.0, 0.0], [0.0, 1.0]])
        p = Tensor([[1.0, 0.0], [0.0, 1.0]])
        selected = [PenaltyEntry(0, BRANCH_B, 0), PenaltyEntry(1, BRANCH_A, 1)]
        assert l_pb(selected, z_a, z_b, p, p).item() == pytest.approx((3.0 + 2.0) / 2)

    def test_l_pb_leaves_the_other_branch_without_gradient(self):
        z_a = Tensor([[1.0, 0.0], [0.0, 2.0]], requires_grad=True)
        z_b = Tensor([[3.0, 0.0], [0.0, 1.0]], requires_grad=True)
        p_a = Tensor([[1.0, 2.0], [3.0, 4.0]], requires_grad=True)
        p_b = Tensor([[5.0, 6.0], [7.0, 8.0]], requires_grad=True)
        selected = [PenaltyEntry(0, BRANCH_B, 0), PenaltyEntry(1, BRANCH_A, 1)]
        l_pb(selected, z_a, z_b, p_a, p_b).backward()
        # row 0 penalizes branch B at class 0, row 1 branch A at class 1
        np.testing.assert_array_equal(z_a.grad, [[0.0, 0.0], [1.5, 2.0]])
        np.testing.assert_array_equal(z_b.grad, [[2.5, 3.0], [0.0, 0.0]])
        np.testing.assert_array_equal(p_a.grad, [[0.0, 0.0], [0.0, 1.0]])
        np.testing.assert_array_equal(p_b.grad, [[1.5, 0.0], [0.0, 0.0]])


class TestTotalLoss:
    def test_without_cross_terms_is_sum_of_branch_objectives(self, tiny_model, tiny_batch):
        weights = LossWeights(alpha=0.0, beta=0.0)
        loss, report = total_loss(tiny_model, tiny_batch, weights)
        expected = (l_faem(tiny_model.branch_a, tiny_batch, weights).item()
                    + l_faem(tiny_model.branch_b, tiny_batch, weights).item())
        assert loss.item() == pytest.approx(expected)
        assert report.total == pytest.approx(report.weighted_total(weights))

    def test_report_reconstructs_total(self, tiny_model, tiny_batch):
        weights = LossWeights(lam=0.7, gamma=0.3, alpha=2.0, beta=5.0)
        loss, report = total_loss(tiny_model, tiny_batch, weights)
        assert report.weighted_total(weights) == pytest.approx(loss.item())
        assert report.non_finite_terms() == []

    def test_single_branch_reports_zero_cross_terms(self, encoder_config, tiny_batch):
        model = init_model(encoder_config, n_classes=3, seed=2, dual=False)
        weights = LossWeights()
        loss, report = total_loss(model, tiny_batch, weights)
        assert loss.item() == pytest.approx(l_faem(model.branch_a, tiny_batch, weights).item())
        assert report.l_orth == report.l_pb == report.l_eps_b == 0.0

    def test_no_background(self, tiny_model, tiny_batch):
        batch = Batch(known_x=tiny_batch.known_x, known_y=tiny_batch.known_y,
                      background_x=Tensor(np.zeros((0, 6))))
        _, report = total_loss(tiny_model, batch, LossWeights())
        assert report.l_fb_a == report.l_fb_b == report.l_pb == 0.0
        assert report.m_pb == 0

    def test_every_parameter_receives_gradient(self, tiny_model, tiny_batch):
        loss, _ = total_loss(tiny_model, tiny_batch, LossWeights())
        loss.backward()
        for name, param in tiny_model.named_parameters():
            assert param.grad is not None, name


class TestLossTypes:
    def test_negative_weight_rejected(self):
        with pytest.raises(ConfigError):
            LossWeights(alpha=-1.0)

    def test_weights_from_dict(self):
        weights = LossWeights.from_dict({'lambda': 0.5, 'beta': 0.2})
        assert (weights.lam, weights.gamma, weights.alpha, weights.beta) == (0.5, 1.0, 0.1, 0.2)
        with pytest.raises(ConfigError):
            LossWeights.from_dict({'delta': 1.0})

    def test_flags_zero_disabled_terms(self):
        flags = AblationFlags(multi_projection=False, use_l_fb=False)
        weights = flags.apply(LossWeights())
        assert (weights.lam, weights.gamma, weights.alpha, weights.beta) == (1.0, 0.0, 0.0, 0.0)

    def test_flag_labels(self):
        assert AblationFlags(False, False, False, False, False).label() == 'PL'
        assert AblationFlags().label() == 'MP+L_F+L_Fb+L_orth+L_Pb'

    def test_report_dict_round_trip(self):
        report = LossReport(l_eps_a=1.0, l_orth=0.5, total=1.5, m_pb=3)
        assert LossReport.from_dict(report.to_dict()) == report

    def test_log_line_carries_every_term(self):
        line = LossReport(total=2.0).to_log_line(7)
        assert line.startswith('step=7 ')
        for term in LossReport.TERMS:
            assert f"{term}=" in line
