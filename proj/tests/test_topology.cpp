#include <doctest.h>

#include <cmath>
#include <set>

#include "srm/error.hpp"
#include "srm/topology.hpp"

using namespace srm::topology;

TEST_CASE("teeth counts") {
  CHECK(stator_teeth_count(3, 2) == 12);
  CHECK(stator_teeth_count(1, 1) == 2);
  CHECK(stator_teeth_count(3, 1) == 6);
  CHECK(rotor_teeth_count(2, 5) == 14);
  CHECK(rotor_teeth_count(2, 2) == 8);
  CHECK(rotor_teeth_count(2, 4) == 12);
  CHECK_THROWS_AS(stator_teeth_count(0, 2), srm::Error);
  CHECK_THROWS_AS(stator_teeth_count(3, 0), srm::Error);
  CHECK_THROWS_AS(rotor_teeth_count(2, 0), srm::Error);
}

TEST_CASE("classify the paper's examples") {
  const auto c4 = classify(3, 2, 4);
  CHECK_FALSE(c4.feasible);
  CHECK(c4.reason == Infeasibility::kFullAlignmentDegeneracy);
  const auto c1 = classify(3, 2, 1);
  CHECK_FALSE(c1.feasible);
  CHECK(c1.reason == Infeasibility::kAdjacentPhaseIntersection);
  const auto c5 = classify(3, 2, 5);
  CHECK(c5.feasible);
  CHECK(c5.reason == Infeasibility::kNone);
  CHECK(c5.stator_teeth == 12);
  CHECK(c5.rotor_teeth == 14);
  CHECK_THROWS_AS(classify(3, 2, 0), srm::Error);
}

TEST_CASE("enumerate feasible rotor teeth for q=3 m=2") {
  const auto all = enumerate_feasible(3, 2, 12);
  REQUIRE(all.size() == 12);
  std::set<int> feasible;
  for (std::size_t k = 0; k < all.size(); ++k) {
    CHECK(all[k].rotor_index == static_cast<int>(k) + 1);
    if (all[k].feasible) feasible.insert(all[k].rotor_teeth);
  }
  CHECK(feasible == std::set<int>{8, 10, 14, 16, 20, 22, 26, 28});

  const auto one = enumerate_feasible(3, 2, 1);
  REQUIRE(one.size() == 1);
  CHECK_FALSE(one[0].feasible);

  const auto four = enumerate_feasible(3, 2, 4);
  std::set<int> f4, inf4;
  for (const auto& c : four) (c.feasible ? f4 : inf4).insert(c.rotor_teeth);
  CHECK(f4 == std::set<int>{8, 10});
  CHECK(inf4 == std::set<int>{6, 12});
  CHECK_THROWS_AS(enumerate_feasible(3, 2, 0), srm::Error);
}

TEST_CASE("geometric check agrees with the multiple-of-six rule") {
  for (int n = 2; n <= 100; ++n) {
    const auto c = classify(3, 2, n);
    CHECK_MESSAGE(c.feasible == ((2 * 2 + 2 * n) % 6 != 0), "n = " << n);
    CHECK(c.feasible == (c.reason == Infeasibility::kNone));
  }
}

TEST_CASE("alignment degeneracy") {
  TeethCombination tc;
  CHECK(alignment_degeneracy_check(tc, c_core_tooth_layout(3, 2, 4)));
  CHECK_FALSE(alignment_degeneracy_check(tc, c_core_tooth_layout(3, 2, 5)));
  // One C-core whose teeth sit exactly one rotor pitch apart.
  ToothLayout single{{0.0, 45.0}, 45.0};
  CHECK(alignment_degeneracy_check(tc, single));
}

TEST_CASE("phase cores are evenly spread and shifted by a third of a pitch") {
  const double pitch = 360.0 / 14;
  CHECK(c_core_center_deg(3, 2, 14, 0) == doctest::Approx(0.0));
  CHECK(c_core_center_deg(3, 2, 14, 3) == doctest::Approx(180.0));
  for (int k = 1; k < 3; ++k) {
    const double c = c_core_center_deg(3, 2, 14, k);
    double e = std::fmod(c, pitch);
    const double third = pitch / 3.0;
    const bool shifted = std::abs(e - third) < 1e-9 || std::abs(e - 2 * third) < 1e-9;
    CHECK(shifted);
  }
}
