#include <doctest.h>

#include "metafas/rng.hpp"
#include "metafas/tensor.hpp"

using namespace metafas;

TEST_CASE("rng streams are deterministic and serializable") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());

    const std::string state = a.state();
    const double next = a.uniform();
    Rng c(0);
    c.set_state(state);
    CHECK(c.uniform() == next);
}

TEST_CASE("rng helpers stay in range") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const int k = rng.uniform_int(13);
        CHECK(k >= 0);
        CHECK(k < 13);
    }
}

TEST_CASE("derived seeds differ per index") {
    CHECK(Rng::derive_seed(1, 0) != Rng::derive_seed(1, 1));
    CHECK(Rng::derive_seed(1, 0) != Rng::derive_seed(2, 0));
}

TEST_CASE("tensor layout is channel-major") {
    Tensor t(2, 3, 4);
    t.at(1, 2, 3) = 5.0;
    CHECK(t.v[1 * 12 + 2 * 4 + 3] == 5.0);
    CHECK(t.channel(1)[2 * 4 + 3] == 5.0);
}
