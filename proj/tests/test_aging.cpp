#include "cbt/aging.hpp"
#include "doctest.h"

using namespace cbt;

TEST_SUITE("aging") {

TEST_CASE("effective priority examples") {
    CHECK(effective_priority(0, 0, false, {1, 2}) == 0);
    CHECK(effective_priority(0, 4, false, {1, 0}) == 4);
    CHECK(effective_priority(2, 0, true, {1, 3}) == 5);
    CHECK_THROWS_AS(effective_priority(-1, 0, false, {}), std::invalid_argument);
    CHECK_THROWS_AS(effective_priority(0, -2, false, {}), std::invalid_argument);
}

TEST_CASE("four denied ticks age a waiter by four increments") {
    const PolicyConfig cfg{1, 0};
    Priority p{0, 0};
    for (int i = 0; i < 4; ++i) p = update_after_tick(p, Arbitration::Denied);
    CHECK(effective_priority(p, false, cfg) == 4);
}

TEST_CASE("wait counter rules") {
    CHECK(update_after_tick({0, 3}, Arbitration::Granted).wait_ticks == 0);
    CHECK(update_after_tick({0, 3}, Arbitration::Denied).wait_ticks == 4);
    CHECK(update_after_tick({0, 0}, Arbitration::NotRequesting).wait_ticks == 0);
    CHECK(update_after_tick({5, 2}, Arbitration::NotRequesting) == Priority{5, 2});
}

TEST_CASE("starvation bound by hand simulation") {
    // A waiter with base b_w against a holder of base b_h; the holder keeps
    // its bonus. Count denied ticks until the waiter strictly wins or, on a
    // tie, wins by being the lower index.
    for (int inc = 1; inc <= 3; ++inc) {
        for (int bonus : {0, 2, 5}) {
            for (int bh = 0; bh <= 5; ++bh) {
                for (int bw = 0; bw <= 5; ++bw) {
                    const PolicyConfig cfg{inc, bonus};
                    for (bool waiter_first : {true, false}) {
                        int denied = 0;
                        for (;;) {
                            const int w = effective_priority(bw, denied, false, cfg);
                            const int h = effective_priority(bh, 0, true, cfg);
                            if (w > h || (w == h && waiter_first)) break;
                            ++denied;
                        }
                        CHECK(denied <= starvation_bound(std::max(bh, bw), bw, cfg));
                    }
                }
            }
        }
    }
}

TEST_CASE("bound over a tree takes the worst child") {
    NodeSpec t = parallel_mutex({with_priority(action("A"), 1), with_priority(action("B"), 0), action("C")});
    CHECK(starvation_bound(t, PolicyConfig{}) == 1 + 2 - 0 + 1);
    CHECK(starvation_bound(action("A"), PolicyConfig{}) == 1);
}

}  // TEST_SUITE
