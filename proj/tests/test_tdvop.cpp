#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "tdv/tdvop.hpp"

using namespace tdv;

namespace {

DirectionModel random_model(const GridId& centres, Rng& rng, bool unit_b = false) {
  VectorField v{ScalarField(centres), ScalarField(centres)};
  for (std::size_t i = 0; i < v.x.v.size(); ++i) {
    const double a = rng.uniform(0, 2 * M_PI);
    v.x.v[i] = std::cos(a);
    v.y.v[i] = std::sin(a);
  }
  ScalarField b1(centres), b2(centres);
  for (std::size_t i = 0; i < b1.v.size(); ++i) {
    b1.v[i] = unit_b ? 1.0 : rng.uniform(0, 1);
    b2.v[i] = unit_b ? 1.0 : rng.uniform(0, 1);
  }
  return assemble_m(v, b1, b2);
}

PrimalVars random_primal(const OperatorStack& K, Rng& rng) {
  PrimalVars z = K.zero_primal();
  for (auto& blk : z.z)
    for (auto& f : blk)
      for (double& x : f.v) x = rng.uniform(-1, 1);
  return z;
}

DualVars random_dual(const OperatorStack& K, Rng& rng) {
  DualVars w = K.zero_dual();
  for (auto& blk : w.w)
    for (auto& f : blk)
      for (double& x : f.v) x = rng.uniform(-1, 1);
  return w;
}

std::vector<double> flatten(const std::vector<Block>& blocks) {
  std::vector<double> out;
  for (const auto& blk : blocks)
    for (const auto& f : blk) out.insert(out.end(), f.v.begin(), f.v.end());
  return out;
}

}  // namespace

TEST_CASE("weighted_grad1 identity weights equal the transferred gradient") {
  Rng rng(71);
  GridId g = pixel_grid(8, 7);
  GridId cg = centre_grid(8, 7);
  ScalarField u = oracle::random_field(g, rng);
  DirectionModel id = constant_direction_model(cg, 1.0, 0.0, 1.0, 1.0);
  TensorFieldStack wg = weighted_grad1(u, id);
  TensorFieldStack iso = grad1(u);
  ScalarField t1 = transfer_for(iso.c[0].grid).to_centres(iso.c[0]);
  ScalarField t2 = transfer_for(iso.c[1].grid).to_centres(iso.c[1]);
  for (std::size_t i = 0; i < t1.v.size(); ++i) {
    CHECK(wg.c[0].v[i] == Catch::Approx(t1.v[i]).margin(1e-14));
    CHECK(wg.c[1].v[i] == Catch::Approx(t2.v[i]).margin(1e-14));
  }
}

TEST_CASE("weighted_grad1 annihilates variation across v when b = (1,0)") {
  GridId g = pixel_grid(12, 12);
  GridId cg = centre_grid(12, 12);
  // u varies only along axis 2 (v_perp); v = axis 1
  ScalarField u(g);
  for (int r = 0; r < 12; ++r)
    for (int c = 0; c < 12; ++c) u.at(r, c) = 0.37 * c;
  DirectionModel m = constant_direction_model(cg, 1.0, 0.0, 1.0, 0.0);
  TensorFieldStack wg = weighted_grad1(u, m);
  for (const auto& f : wg.c)
    for (double x : f.v) CHECK(std::abs(x) < 1e-13);
}

TEST_CASE("weighted pair adjointness and dense transpose") {
  Rng rng(73);
  GridId g = pixel_grid(6, 6);
  GridId cg = centre_grid(6, 6);
  DirectionModel m = random_model(cg, rng);

  for (int t = 0; t < 30; ++t) {
    ScalarField u = oracle::random_field(g, rng);
    TensorFieldStack p(1, {oracle::random_field(cg, rng), oracle::random_field(cg, rng)});
    const double lhs = inner_product(weighted_grad1(u, m), p);
    const double rhs = inner_product(u, weighted_div1(p, m));
    CHECK(std::abs(lhs - rhs) <= 1e-11 * (std::abs(lhs) + 1));
  }

  TensorFieldStack zero(1, {make_field(cg, 0.0), make_field(cg, 0.0)});
  for (double x : weighted_div1(zero, m).v) CHECK(x == 0.0);

  auto fwd = [&](const std::vector<double>& x) {
    ScalarField u(g);
    u.v = x;
    TensorFieldStack s = weighted_grad1(u, m);
    std::vector<double> out = s.c[0].v;
    out.insert(out.end(), s.c[1].v.begin(), s.c[1].v.end());
    return out;
  };
  oracle::Dense D = oracle::materialise(2 * 25, 36, fwd);
  TensorFieldStack p(1, {oracle::random_field(cg, rng), oracle::random_field(cg, rng)});
  std::vector<double> pin = p.c[0].v;
  pin.insert(pin.end(), p.c[1].v.begin(), p.c[1].v.end());
  std::vector<double> expect = oracle::matvec_transpose(D, pin);
  ScalarField got = weighted_div1(p, m);
  for (std::size_t i = 0; i < got.v.size(); ++i)
    CHECK(got.v[i] == Catch::Approx(expect[i]).margin(1e-12));

  // identity weights collapse to div1 of the back-transferred field
  DirectionModel id = constant_direction_model(cg, 1.0, 0.0, 1.0, 1.0);
  TensorFieldStack q(1, {oracle::random_field(cg, rng), oracle::random_field(cg, rng)});
  GridId x1 = derivative_grid(6, 6, 1, 0u), x2 = derivative_grid(6, 6, 1, 1u);
  TensorFieldStack back(1, {transfer_for(x1).from_centres(q.c[0]),
                            transfer_for(x2).from_centres(q.c[1])});
  ScalarField expect2 = div1(back);
  ScalarField got2 = weighted_div1(q, id);
  for (std::size_t i = 0; i < got2.v.size(); ++i)
    CHECK(got2.v[i] == Catch::Approx(expect2.v[i]).margin(1e-13));
}

TEST_CASE("build_stack shapes and validation") {
  GridId g = pixel_grid(8, 8);
  OperatorStack k1 = build_stack(1, {LevelWeight{}}, {Radius::of(1.0)}, g);
  CHECK(k1.zero_dual().w[0].size() == 2);

  CHECK_THROWS_AS(build_stack(4, {}, {}, g), error);
  CHECK_THROWS_AS(build_stack(2, {LevelWeight{}}, {Radius::of(1), Radius::of(1)}, g), error);

  Rng rng(79);
  DirectionModel bad = random_model(centre_grid(6, 6), rng);
  CHECK_THROWS_AS(build_stack(1, {LevelWeight{bad}}, {Radius::of(1)}, g), error);
}

TEST_CASE("identity q=2 stack reproduces the TGV pattern") {
  Rng rng(83);
  GridId g = pixel_grid(9, 9);
  OperatorStack K = build_stack(2, {LevelWeight{}, LevelWeight{}},
                                {Radius::of(1.0), Radius::of(1.0)}, g);
  PrimalVars z = random_primal(K, rng);
  DualVars w = stack_apply(K, z);

  // first row: grad z0 - z1; second row: grad (x) z1
  TensorFieldStack gz0 = grad1(z.z[0][0]);
  for (int k = 0; k < 2; ++k)
    for (std::size_t i = 0; i < gz0.c[0].v.size(); ++i)
      CHECK(w.w[0][k].v[i] ==
            Catch::Approx(gz0.c[std::size_t(k)].v[i] - z.z[1][std::size_t(k)].v[i]).margin(1e-13));
  for (std::size_t t = 0; t < 2; ++t) {
    ScalarField d1 = dx1(z.z[1][t]), d2 = dx2(z.z[1][t]);
    for (std::size_t i = 0; i < d1.v.size(); ++i) {
      CHECK(w.w[1][2 * t].v[i] == Catch::Approx(d1.v[i]).margin(1e-13));
      CHECK(w.w[1][2 * t + 1].v[i] == Catch::Approx(d2.v[i]).margin(1e-13));
    }
  }

  // exact cancellation: z1 = K11 z0 makes the first row vanish
  PrimalVars zc = K.zero_primal();
  zc.z[0] = z.z[0];
  zc.z[1] = K.level_forward(1, zc.z[0]);
  DualVars wc = stack_apply(K, zc);
  for (const auto& f : wc.w[0])
    for (double x : f.v) CHECK(x == 0.0);
}

TEST_CASE("stack apply/adjoint: zero maps and adjointness") {
  Rng rng(89);
  for (int q = 1; q <= 3; ++q) {
    GridId g = pixel_grid(10, 9);
    GridId cg = centre_grid(10, 9);
    std::vector<LevelWeight> lw;
    std::vector<Radius> al;
    for (int j = 0; j < q; ++j) {
      lw.push_back(j % 2 == 0 ? LevelWeight{random_model(cg, rng)} : LevelWeight{});
      al.push_back(Radius::of(1.0));
    }
    OperatorStack K = build_stack(q, lw, al, g);

    DualVars w0 = stack_apply(K, K.zero_primal());
    for (const auto& blk : w0.w)
      for (const auto& f : blk)
        for (double x : f.v) CHECK(x == 0.0);
    PrimalVars z0 = stack_apply_adjoint(K, K.zero_dual());
    for (const auto& blk : z0.z)
      for (const auto& f : blk)
        for (double x : f.v) CHECK(x == 0.0);

    for (int t = 0; t < 30; ++t) {
      PrimalVars z = random_primal(K, rng);
      DualVars w = random_dual(K, rng);
      DualVars kz = stack_apply(K, z);
      PrimalVars ktw = stack_apply_adjoint(K, w);
      double lhs = 0, rhs = 0, kn = 0, wn = 0;
      for (int j = 0; j < q; ++j) {
        lhs += block_dot(kz.w[std::size_t(j)], w.w[std::size_t(j)]);
        rhs += block_dot(z.z[std::size_t(j)], ktw.z[std::size_t(j)]);
        kn += block_dot(kz.w[std::size_t(j)], kz.w[std::size_t(j)]);
        wn += block_dot(w.w[std::size_t(j)], w.w[std::size_t(j)]);
      }
      CHECK(std::abs(lhs - rhs) <= 1e-11 * (std::sqrt(kn * wn) + 1));
    }
  }
}

TEST_CASE("stack adjoint matches the dense transpose on 6x6, q=2") {
  Rng rng(97);
  GridId g = pixel_grid(6, 6);
  GridId cg = centre_grid(6, 6);
  OperatorStack K = build_stack(2, {LevelWeight{random_model(cg, rng)},
                                    LevelWeight{random_model(cg, rng)}},
                                {Radius::of(1.0), Radius::of(1.0)}, g);
  PrimalVars zproto = K.zero_primal();
  DualVars wproto = K.zero_dual();
  int nz = int(flatten(zproto.z).size());
  int nw = int(flatten(wproto.w).size());

  auto fwd = [&](const std::vector<double>& x) {
    PrimalVars z = K.zero_primal();
    std::size_t o = 0;
    for (auto& blk : z.z)
      for (auto& f : blk)
        for (double& t : f.v) t = x[o++];
    return flatten(stack_apply(K, z).w);
  };
  oracle::Dense D = oracle::materialise(nw, nz, fwd);

  DualVars w = random_dual(K, rng);
  std::vector<double> expect = oracle::matvec_transpose(D, flatten(w.w));
  std::vector<double> got = flatten(stack_apply_adjoint(K, w).z);
  for (std::size_t i = 0; i < got.size(); ++i)
    CHECK(got[i] == Catch::Approx(expect[i]).margin(1e-12));
}

TEST_CASE("identity stacks match the plain grad_q/div_q modules") {
  Rng rng(101);
  GridId g = pixel_grid(11, 7);
  for (int q = 1; q <= 3; ++q) {
    std::vector<LevelWeight> lw;
    lw.resize(std::size_t(q));
    std::vector<Radius> al;
    al.resize(std::size_t(q), Radius::of(1.0));
    OperatorStack K = build_stack(q, lw, al, g);
    ScalarField u = oracle::random_field(g, rng);
    PrimalVars z = K.zero_primal();
    z.z[0][0] = u;
    // chain the levels: z_j = K_jj z_{j-1} reproduces grad_q at the last row
    for (int j = 1; j < q; ++j) z.z[std::size_t(j)] = K.level_forward(j, z.z[std::size_t(j - 1)]);
    DualVars w = stack_apply(K, z);
    TensorFieldStack gq = grad_q(u, q);
    for (std::size_t k = 0; k < gq.c.size(); ++k)
      for (std::size_t i = 0; i < gq.c[k].v.size(); ++i)
        CHECK(w.w[std::size_t(q - 1)][k].v[i] == Catch::Approx(gq.c[k].v[i]).margin(1e-12));
  }
}

TEST_CASE("tdv_energy_reduced") {
  GridId g = pixel_grid(10, 10);
  GridId cg = centre_grid(10, 10);
  CHECK(tdv_energy_reduced(make_field(g, 4.2), 2, std::nullopt, 1.0) == 0.0);

  // q=1 identity equals plain TV (no transfer when the model is absent)
  Rng rng(103);
  ScalarField u = oracle::random_field(g, rng);
  CHECK(tdv_energy_reduced(u, 1, std::nullopt, 0.7) == Catch::Approx(0.7 * norm21(grad1(u))));

  // stripes along v with b = (1,0): energy vanishes; across v: full strength
  ScalarField along(g), across(g);
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 10; ++c) {
      along.at(r, c) = 0.3 * c;  // varies along axis 2 only
      across.at(r, c) = 0.3 * r;
    }
  DirectionModel m = constant_direction_model(cg, 1.0, 0.0, 1.0, 0.0);  // v = axis 1
  CHECK(tdv_energy_reduced(along, 1, m, 1.0) == Catch::Approx(0.0).margin(1e-12));
  CHECK(tdv_energy_reduced(across, 1, m, 1.0) > 1.0);

  // 1-homogeneity
  for (int t = 0; t < 10; ++t) {
    ScalarField ur = oracle::random_field(g, rng);
    const double a = rng.uniform(-3, 3);
    DirectionModel mr = random_model(cg, rng);
    const double e1 = tdv_energy_reduced(ur, 2, mr, 1.3);
    const double ea = tdv_energy_reduced(scaled(ur, a), 2, mr, 1.3);
    CHECK(ea == Catch::Approx(std::abs(a) * e1).epsilon(1e-12));
  }
}

TEST_CASE("operator norm bounds") {
  GridId g = pixel_grid(12, 12, 1.0);
  OperatorStack k1 = build_stack(1, {LevelWeight{}}, {Radius::of(1.0)}, g);
  CHECK(operator_norm_bound(k1) == Catch::Approx(std::sqrt(8.0)));
  OperatorStack k2 =
      build_stack(2, {LevelWeight{}, LevelWeight{}}, {Radius::of(1.0), Radius::of(1.0)}, g);
  CHECK(operator_norm_bound(k2) == Catch::Approx(8.0));

  // power iteration never exceeds the bound, over random weight configurations
  Rng rng(107);
  for (int t = 0; t < 50; ++t) {
    const int q = rng.uniform_int(1, 3);
    const int m = rng.uniform_int(5, 12), n = rng.uniform_int(5, 12);
    GridId gr = pixel_grid(m, n);
    GridId cg = centre_grid(m, n);
    std::vector<LevelWeight> lw;
    std::vector<Radius> al;
    for (int j = 0; j < q; ++j) {
      lw.push_back(rng.uniform() < 0.3 ? LevelWeight{} : LevelWeight{random_model(cg, rng)});
      al.push_back(Radius::of(1.0));
    }
    OperatorStack K = build_stack(q, lw, al, gr);
    CHECK(power_iteration_norm(K) <= operator_norm_bound(K) * (1.0 + 1e-9));
  }

  // materialised 8x8 power norm stays below the bound too
  GridId g8 = pixel_grid(8, 8);
  GridId cg8 = centre_grid(8, 8);
  Rng rng2(109);
  OperatorStack K = build_stack(2, {LevelWeight{random_model(cg8, rng2)}, LevelWeight{}},
                                {Radius::of(1.0), Radius::of(1.0)}, g8);
  PrimalVars zproto = K.zero_primal();
  int nz = int(flatten(zproto.z).size());
  int nw = int(flatten(K.zero_dual().w).size());
  auto fwd = [&](const std::vector<double>& x) {
    PrimalVars z = K.zero_primal();
    std::size_t o = 0;
    for (auto& blk : z.z)
      for (auto& f : blk)
        for (double& t : f.v) t = x[o++];
    return flatten(stack_apply(K, z).w);
  };
  oracle::Dense D = oracle::materialise(nw, nz, fwd);
  CHECK(oracle::power_norm(D) <= operator_norm_bound(K) + 1e-9);
}

TEST_CASE("radius marker") {
  CHECK_THROWS_AS(Radius::of(0.0), error);
  CHECK_THROWS_AS(Radius::of(-2.0), error);
  CHECK_FALSE(Radius::unbounded().finite);
}
