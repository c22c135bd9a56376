#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sta/checkpoint.hpp"
#include "sta/error.hpp"
#include "sta/matrix.hpp"
#include "sta/optim.hpp"
#include "sta/rng.hpp"
#include "support/oracles.hpp"

using namespace sta;

TEST_SUITE("matrix") {
  TEST_CASE("matmul agrees with the triple loop") {
    Rng rng(1);
    const Matrix a = oracle::gaussian(5, 7, rng);
    const Matrix b = oracle::gaussian(7, 3, rng);
    CHECK(max_abs_diff(matmul(a, b), oracle::multiply(a, b)) < 1e-14);
  }

  TEST_CASE("slice and concat invert each other") {
    Rng rng(2);
    const Matrix a = oracle::gaussian(4, 6, rng);
    const Matrix parts[] = {slice_cols(a, 0, 2), slice_cols(a, 2, 4)};
    CHECK(concat_cols(parts) == a);
  }

  TEST_CASE("shape errors") {
    CHECK_THROWS_AS((void)matmul(Matrix(2, 3), Matrix(2, 3)), Error);
    CHECK_THROWS_AS((void)add(Matrix(2, 3), Matrix(3, 2)), Error);
    CHECK_THROWS_AS((void)slice_cols(Matrix(2, 3), 2, 2), Error);
  }

  TEST_CASE("finiteness") {
    Matrix m(2, 2);
    CHECK(m.all_finite());
    m(1, 1) = NAN;
    CHECK_FALSE(m.all_finite());
  }
}

TEST_SUITE("rng") {
  TEST_CASE("same seed, same stream; derived streams differ") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    Rng c = Rng::derive(42, 0), d = Rng::derive(42, 1);
    CHECK(c.next() != d.next());
  }

  TEST_CASE("uniform, below and normal moments") {
    Rng rng(7);
    const int n = 200000;
    double su = 0.0, sn = 0.0, sn2 = 0.0;
    std::vector<int> counts(5, 0);
    for (int i = 0; i < n; ++i) {
      const double u = rng.uniform();
      CHECK_UNARY(u >= 0.0 && u < 1.0);
      su += u;
      const double z = rng.normal();
      sn += z;
      sn2 += z * z;
      ++counts[rng.below(5)];
    }
    CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::abs(sn / n) < 0.01);
    CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
    for (int c : counts) CHECK(c == doctest::Approx(n / 5.0).epsilon(0.03));
  }

  TEST_CASE("shuffle is a permutation") {
    Rng rng(9);
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    rng.shuffle(std::span<int>(v));
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);
    CHECK_FALSE(std::is_sorted(v.begin(), v.end()));
  }
}

TEST_SUITE("optim") {
  TEST_CASE("two Adam steps match the hand-computed recurrence") {
    const AdamOptions o{0.1, 0.9, 0.999, 1e-8, 0.0};
    AdamState state(o);
    ad::Parameter p("w", Matrix::from_rows({{1.0, -2.0}}));
    ad::Parameter* ps[] = {&p};
    const double g1[] = {0.5, -3.0}, g2[] = {-1.0, 2.0};
    double theta[] = {1.0, -2.0}, m[] = {0, 0}, v[] = {0, 0};
    for (int step = 1; step <= 2; ++step) {
      const double* g = step == 1 ? g1 : g2;
      p.grad = Matrix::from_rows({{g[0], g[1]}});
      adam_step(state, ps);
      for (int i = 0; i < 2; ++i) {
        m[i] = 0.9 * m[i] + 0.1 * g[i];
        v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
        const double mh = m[i] / (1 - std::pow(0.9, step));
        const double vh = v[i] / (1 - std::pow(0.999, step));
        theta[i] -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
        CHECK(p.value(0, i) == doctest::Approx(theta[i]).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("weight decay is decoupled and respects the decay flag") {
    AdamState state(AdamOptions{0.1, 0.9, 0.999, 1e-8, 0.01});
    ad::Parameter decayed("a", Matrix(1, 1, 2.0), true);
    ad::Parameter kept("b", Matrix(1, 1, 2.0), false);
    decayed.zero_grad();
    kept.zero_grad();
    ad::Parameter* ps[] = {&decayed, &kept};
    adam_step(state, ps);
    CHECK(decayed.value(0, 0) == doctest::Approx(2.0 * (1.0 - 0.1 * 0.01)).epsilon(1e-15));
    CHECK(kept.value(0, 0) == 2.0);
  }

  TEST_CASE("Adam minimizes a quadratic") {
    AdamState state(AdamOptions{0.05});
    ad::Parameter p("x", Matrix::from_rows({{3.0, -4.0}}));
    ad::Parameter* ps[] = {&p};
    for (int i = 0; i < 2000; ++i) {
      p.grad = Matrix::from_rows({{2.0 * (p.value(0, 0) - 1.0), 2.0 * (p.value(0, 1) + 2.0)}});
      adam_step(state, ps);
    }
    CHECK(p.value(0, 0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(p.value(0, 1) == doctest::Approx(-2.0).epsilon(1e-3));
  }
}

TEST_SUITE("checkpoint") {
  Checkpoint sample() {
    Checkpoint c;
    c.metadata = "{\"k\": 1}";
    c.tensors.push_back({"w", Matrix::from_rows({{1.5, -2.0, 3.25}, {0.0, 1e-300, -7.0}})});
    c.tensors.push_back({"empty", Matrix()});
    return c;
  }

  TEST_CASE("encode/decode round trip") {
    const Checkpoint c = sample();
    CHECK(decode_checkpoint(encode_checkpoint(c)) == c);
  }

  TEST_CASE("layout: magic, version byte, little-endian payload") {
    const std::string bytes = encode_checkpoint(sample());
    CHECK(bytes.substr(0, 8) == std::string("STACKPT\0", 8));
    CHECK(static_cast<unsigned char>(bytes[8]) == kCheckpointVersion);
    // metadata length as u32 LE
    CHECK(static_cast<unsigned char>(bytes[9]) == 8);
    CHECK(bytes[10] == 0);
  }

  TEST_CASE("corrupt inputs are rejected") {
    std::string bytes = encode_checkpoint(sample());
    CHECK_THROWS_AS((void)decode_checkpoint(bytes.substr(0, bytes.size() - 3)), Error);
    CHECK_THROWS_AS((void)decode_checkpoint(bytes + "x"), Error);
    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS((void)decode_checkpoint(bad_magic), Error);
    std::string bad_version = bytes;
    bad_version[8] = 9;
    CHECK_THROWS_AS((void)decode_checkpoint(bad_version), Error);
  }

  TEST_CASE("file round trip and missing file") {
    const auto path = std::filesystem::temp_directory_path() / "sta_ckpt_test.bin";
    write_checkpoint(path, sample());
    CHECK(read_checkpoint(path) == sample());
    std::filesystem::remove(path);
    try {
      (void)read_checkpoint(path);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Io);
    }
  }
}
