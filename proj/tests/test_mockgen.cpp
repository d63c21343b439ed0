#include <map>

#include "doctest.h"
#include "longcot/mockgen.hpp"
#include "longcot/verifier.hpp"
#include "support/fixtures.hpp"

using namespace longcot;

TEST_CASE("planned wrong answers never grade as correct") {
    for (const char* gt : {"7", "99991", "99992", "1/2", "0.5", "(3, 4)", "-12", "\\frac{4}{7}", "x+1"}) {
        CAPTURE(gt);
        std::string wrong = planned_wrong_answer(gt);
        CHECK_FALSE(equivalent(wrong, gt));
        CHECK_FALSE(wrong.empty());
    }
}

TEST_CASE("plans are a pure function of seed and problem text") {
    MockgenSettings settings;
    ProblemRecord problem = testsupport::make_problem(3);

    ProblemPlan a = plan_for_problem(problem, settings, 112);
    ProblemPlan b = plan_for_problem(problem, settings, 112);
    CHECK(a.category == b.category);
    CHECK(a.first_correct_index == b.first_correct_index);
    CHECK(a.rejection_unsolved == b.rejection_unsolved);

    // a different id with the same text gets the identical plan, because
    // identical texts produce identical request fingerprints
    ProblemRecord renamed = problem;
    renamed.id = "other";
    ProblemPlan c = plan_for_problem(renamed, settings, 112);
    CHECK(c.category == a.category);
    CHECK(c.first_correct_index == a.first_correct_index);

    MockgenSettings other_seed = settings;
    other_seed.plan_seed = 999;
    bool any_difference = false;
    for (int i = 0; i < 32; ++i) {
        ProblemRecord p = testsupport::make_problem(i);
        ProblemPlan x = plan_for_problem(p, settings, 112);
        ProblemPlan y = plan_for_problem(p, other_seed, 112);
        any_difference = any_difference || x.category != y.category ||
                         x.first_correct_index != y.first_correct_index;
    }
    CHECK(any_difference);
}

TEST_CASE("category weights shape the plan distribution") {
    MockgenSettings settings;
    settings.ft_weight = 1.0;
    settings.tf_weight = 0.0;
    settings.tt_weight = 0.0;
    settings.ff_weight = 0.0;
    for (int i = 0; i < 20; ++i) {
        ProblemPlan plan = plan_for_problem(testsupport::make_problem(i), settings, 10);
        CHECK(plan.category == ChainCategory::false_to_true);
    }

    SUBCASE("weights need not sum to one") {
        settings.ft_weight = 3.0;
        settings.tf_weight = 1.0;
        std::map<ChainCategory, int> seen;
        for (int i = 0; i < 200; ++i) {
            ++seen[plan_for_problem(testsupport::make_problem(i), settings, 10).category];
        }
        CHECK(seen[ChainCategory::false_to_true] > seen[ChainCategory::true_to_false]);
        CHECK(seen[ChainCategory::true_to_true] == 0);
    }
    SUBCASE("all-zero weights are a configuration error") {
        settings.ft_weight = 0.0;
        CHECK_THROWS(plan_for_problem(testsupport::make_problem(0), settings, 10));
    }
    SUBCASE("the budget must be positive") {
        settings.ft_weight = 1.0;
        CHECK_THROWS(plan_for_problem(testsupport::make_problem(0), settings, 0));
    }
}

TEST_CASE("first_correct_index stays inside the budget or marks unsolved") {
    MockgenSettings settings;
    settings.rejection_unsolved_rate = 0.5;
    int unsolved = 0;
    for (int i = 0; i < 100; ++i) {
        ProblemPlan plan = plan_for_problem(testsupport::make_problem(i), settings, 13);
        if (plan.rejection_unsolved) {
            CHECK(plan.first_correct_index == 13);  // no sample inside the budget is correct
            ++unsolved;
        } else {
            CHECK(plan.first_correct_index >= 0);
            CHECK(plan.first_correct_index < 13);
        }
    }
    CHECK(unsolved > 20);
    CHECK(unsolved < 80);
}

TEST_CASE("eval verdicts depend only on the fingerprint") {
    MockgenSettings settings;
    CHECK(planned_eval_verdict("abc123", settings) == planned_eval_verdict("abc123", settings));

    settings.eval_correct_rate = 1.0;
    CHECK(planned_eval_verdict("anything", settings));
    settings.eval_correct_rate = 0.0;
    CHECK_FALSE(planned_eval_verdict("anything", settings));

    settings.eval_correct_rate = 0.5;
    int correct = 0;
    for (int i = 0; i < 400; ++i) {
        correct += planned_eval_verdict("fp" + std::to_string(i), settings) ? 1 : 0;
    }
    CHECK(correct > 120);
    CHECK(correct < 280);
}
