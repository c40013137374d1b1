#include <doctest.h>

#include <string>

#include "ksymp/ksymp.h"

namespace {

std::string models_dir() { return KSYMP_MODELS_DIR; }

struct Model {
    ksymp_model* ptr = nullptr;
    ~Model() { ksymp_model_free(ptr); }
};

struct Str {
    char* ptr = nullptr;
    ~Str() { ksymp_string_free(ptr); }
    std::string get() const { return ptr ? ptr : ""; }
};

Model load(const std::string& file) {
    Model m;
    REQUIRE(ksymp_model_load_file((models_dir() + "/" + file).c_str(), &m.ptr) == KSYMP_OK);
    return m;
}

} // namespace

TEST_CASE("every shipped model file loads and derives") {
    for (const char* file :
         {"harmonic.model", "oscillator.model", "free2d.model", "bilinear.model",
          "half_vsq.model", "linear_v.model", "affine_qv.model"}) {
        const Model m = load(file);
        CHECK(ksymp_model_k(m.ptr) >= 1);
        CHECK(ksymp_model_n(m.ptr) >= 1);
        Str text;
        CHECK(ksymp_derive(m.ptr, &text.ptr) == KSYMP_OK);
        CHECK(text.get().find("EL[1]") != std::string::npos);
    }
}

TEST_CASE("model loading") {
    const Model m = load("harmonic.model");
    CHECK(ksymp_model_k(m.ptr) == 2);
    CHECK(ksymp_model_n(m.ptr) == 1);
    CHECK(std::string(ksymp_model_name(m.ptr)) == "harmonic");

    ksymp_model* bad = nullptr;
    CHECK(ksymp_model_load_file("/no/such/file.model", &bad) == KSYMP_ERR_IO);
    CHECK(std::string(ksymp_last_error()).find("cannot open") != std::string::npos);

    CHECK(ksymp_model_load_string("k = 2\nn = 1\nlagrangian = q1 +\n", &bad) ==
          KSYMP_ERR_PARSE);
    CHECK(std::string(ksymp_last_error()).find("line 3") != std::string::npos);
}

TEST_CASE("derivation text") {
    const Model m = load("harmonic.model");
    Str text;
    REQUIRE(ksymp_derive(m.ptr, &text.ptr) == KSYMP_OK);
    CHECK(text.get().find("EL[1]: d/dt1(v1_1) + d/dt2(v1_2) + 2*q1 = 0") != std::string::npos);
}

TEST_CASE("check") {
    const Model m = load("harmonic.model");
    Str json;
    int pass = 0;
    REQUIRE(ksymp_check(m.ptr, 25, 3, 1e-9, &json.ptr, &pass) == KSYMP_OK);
    CHECK(pass == 1);
    CHECK(json.get().find("\"regular\":true") != std::string::npos);

    // sample count must be positive
    Str json2;
    CHECK(ksymp_check(m.ptr, 0, 3, 1e-9, &json2.ptr, &pass) == KSYMP_ERR_INVALID);
}

TEST_CASE("integrate") {
    const Model m = load("harmonic.model");
    const double q0[] = {0.0};
    const double v0[] = {1.0, 1.0};

    Str csv;
    int truncated = 1;
    REQUIRE(ksymp_integrate(m.ptr, q0, v0, "t1=0:0.2:0.02,t2=0:0.2:0.02", 1, "auto", "csv",
                            &csv.ptr, &truncated) == KSYMP_OK);
    CHECK(truncated == 0);
    CHECK(csv.get().rfind("t1,t2,q1,v1_1,v1_2", 0) == 0);

    Str json;
    REQUIRE(ksymp_integrate(m.ptr, q0, v0, "t1=0:0.2:0.02,t2=0:0.2:0.02", 1, "auto", "json",
                            &json.ptr, &truncated) == KSYMP_OK);
    CHECK(json.get().find("\"kind\":\"section\"") != std::string::npos);
    CHECK(json.get().find("\"holonomy_max_interior\"") != std::string::npos);

    Str bad;
    CHECK(ksymp_integrate(m.ptr, q0, v0, "t1=0:0.2:0.02,t2=0:0.2:0.02", 1, "auto", "yaml",
                          &bad.ptr, &truncated) == KSYMP_ERR_INVALID);
    CHECK(ksymp_integrate(m.ptr, q0, v0, "t1=0:0.2:0", 1, "auto", "csv", &bad.ptr,
                          &truncated) == KSYMP_ERR_INVALID);
}

TEST_CASE("zero-velocity free model integrates to constant columns") {
    const Model m = load("free2d.model");
    const double q0[] = {0.3, -0.2};
    const double v0[] = {0.0, 0.0, 0.0, 0.0};
    Str a, b;
    int truncated = 0;
    REQUIRE(ksymp_integrate(m.ptr, q0, v0, "t1=0:0.5:0.1,t2=0:0.5:0.1", 1, "auto", "csv",
                            &a.ptr, &truncated) == KSYMP_OK);
    // every data row repeats the datum
    const std::string csv = a.get();
    CHECK(csv.find("0.29999999999999999,-0.20000000000000001,0,0,0,0") != std::string::npos);
    std::size_t rows = 0;
    for (char c : csv)
        rows += c == '\n';
    std::size_t datum_rows = 0;
    for (std::size_t at = csv.find(",0.29999999999999999,"); at != std::string::npos;
         at = csv.find(",0.29999999999999999,", at + 1))
        ++datum_rows;
    CHECK(rows == 37);       // header + 6x6 nodes
    CHECK(datum_rows == 36); // every node carries the same state

    // repeated runs are byte-identical
    REQUIRE(ksymp_integrate(m.ptr, q0, v0, "t1=0:0.5:0.1,t2=0:0.5:0.1", 1, "auto", "csv",
                            &b.ptr, &truncated) == KSYMP_OK);
    CHECK(a.get() == b.get());
}

TEST_CASE("verify on the regular pathway") {
    const Model m = load("harmonic.model");
    const double q0[] = {0.0};
    const double v0[] = {1.0, 1.0};
    Str a, b;
    int pass = 0;
    REQUIRE(ksymp_verify(m.ptr, q0, v0, "t1=0:0.3:0.03,t2=0:0.3:0.03", 10, 5, 1, "auto",
                         &a.ptr, &pass) == KSYMP_OK);
    CHECK(pass == 1);
    CHECK(a.get().find("\"pathway\":\"equivalence\"") != std::string::npos);

    // identical inputs and seed produce byte-identical reports
    REQUIRE(ksymp_verify(m.ptr, q0, v0, "t1=0:0.3:0.03,t2=0:0.3:0.03", 10, 5, 1, "auto",
                         &b.ptr, &pass) == KSYMP_OK);
    CHECK(a.get() == b.get());
}

TEST_CASE("verify degrades to the constraint pathway") {
    const Model m = load("half_vsq.model");
    const double q0[] = {0.1};
    const double v0[] = {0.5, 0.0};
    Str json;
    int pass = 0;
    REQUIRE(ksymp_verify(m.ptr, q0, v0, "t1=0:0.2:0.02,t2=0:0.2:0.02", 10, 5, 1, "auto",
                         &json.ptr, &pass) == KSYMP_OK);
    CHECK(pass == 1);
    CHECK(json.get().find("\"pathway\":\"constraint\"") != std::string::npos);
    CHECK(json.get().find("\"p2_1\"") != std::string::npos);
}

TEST_CASE("constraints") {
    const Model m = load("linear_v.model");
    Str json;
    int pass = 0;
    REQUIRE(ksymp_constraints(m.ptr, 10, 5, 8, 1e-8, &json.ptr, &pass) == KSYMP_OK);
    CHECK(pass == 1);
    CHECK(json.get().find("\"p1_1 - 1\"") != std::string::npos);
    CHECK(json.get().find("\"stabilized\":true") != std::string::npos);
}
