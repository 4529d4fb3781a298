#include "nscr/io.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace nscr;

namespace {

LabeledDataset parse(const std::string& text) {
    std::istringstream in(text);
    return parse_csv_dataset(in, "t.csv");
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const InputError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("csv loader groups by class") {
    const auto data = parse("label,x,y,z\na,1,2,3\nb,4,5,6\na,7,8,9\nb,10,11,12\n");
    CHECK(data.samples.dim() == 3);
    CHECK(data.samples.size() == 4);
    CHECK(data.samples.partition().boundaries() == std::vector<Index>{0, 2, 4});
    CHECK(data.samples.values()(0, 1) == 7.0);  // second 'a' row, file order kept
    CHECK(data.samples.values()(2, 2) == 6.0);
    CHECK(data.feature_names == std::vector<std::string>{"x", "y", "z"});
    CHECK(data.labels() == std::vector<std::string>{"a", "a", "b", "b"});
}

TEST_CASE("integer labels sort numerically and label column may be anywhere") {
    const auto data = parse("f0,label\n1,10\n2,2\n3,1\n");
    CHECK(data.samples.partition().class_ids() == std::vector<std::string>{"1", "2", "10"});
    CHECK(data.samples.values()(0, 0) == 3.0);
}

TEST_CASE("csv loader errors name their location") {
    CHECK(error_of("label\na\n").find("no feature columns") != std::string::npos);
    CHECK(error_of("x,y\n1,2\n").find("no 'label' column") != std::string::npos);
    CHECK(error_of("label,x,x\na,1,2\n").find("duplicate header 'x'") != std::string::npos);
    const auto nan = error_of("label,x,y\na,1,2\nb,NaN,3\n");
    CHECK(nan.find("row 3") != std::string::npos);
    CHECK(nan.find("column 'x'") != std::string::npos);
    CHECK(nan.find("NaN") != std::string::npos);
    CHECK(error_of("label,x\na,abc\n").find("cannot parse 'abc'") != std::string::npos);
    CHECK(error_of("label,x\n").find("zero samples") != std::string::npos);
    CHECK(error_of("label,x\n,1\n").find("empty label") != std::string::npos);
    CHECK(error_of("label,x\na,1,2\n").find("row 2 has 3 cells") != std::string::npos);
    CHECK(error_of("").find("missing header") != std::string::npos);
}

TEST_CASE("csv and binary round trips") {
    Rng rng(17);
    const Matrix<double> cols = gaussian_matrix(rng, 5, 30);
    std::vector<std::string> labels;
    for (int j = 0; j < 30; ++j) labels.push_back(j % 3 == 0 ? "cat" : (j % 3 == 1 ? "dog, big" : "eel"));
    const auto data = group_by_label(cols, labels);
    const auto dir = test::scratch_dir("io");

    write_csv_dataset(dir / "d.csv", data);
    const auto back = load_csv_dataset(dir / "d.csv");
    CHECK(back.samples.partition() == data.samples.partition());
    CHECK((back.samples.values() - data.samples.values()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(back.feature_names == data.feature_names);

    write_binary_dataset(dir / "d.bin", data);
    const auto bin = load_dataset(dir / "d.bin");
    CHECK(bin.samples.values() == data.samples.values());
    CHECK(bin.samples.partition() == data.samples.partition());

    // The csv dispatch path works through load_dataset too.
    CHECK(load_dataset(dir / "d.csv").samples.values() == back.samples.values());
}

TEST_CASE("binary layout is little-endian column-major") {
    Matrix<double> cols(2, 1);
    cols << 1.0, -2.0;
    const auto data = group_by_label(cols, {"q"});
    const auto dir = test::scratch_dir("io_layout");
    write_binary_dataset(dir / "x.bin", data);
    std::ifstream in(dir / "x.bin", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    REQUIRE(bytes.size() == 8 + 8 + 8 + 16 + 8 + 8 + 1);
    CHECK(bytes.substr(0, 8) == "NSCRMAT1");
    CHECK(static_cast<unsigned char>(bytes[8]) == 2);   // D
    CHECK(static_cast<unsigned char>(bytes[16]) == 1);  // N
    // 1.0 = 0x3FF0000000000000, stored low byte first
    CHECK(static_cast<unsigned char>(bytes[24 + 7]) == 0x3F);
    CHECK(static_cast<unsigned char>(bytes[24 + 6]) == 0xF0);
    CHECK(static_cast<unsigned char>(bytes[40]) == 1);  // label count
    CHECK(static_cast<unsigned char>(bytes[48]) == 1);  // label length
    CHECK(bytes.back() == 'q');

    std::ofstream(dir / "bad.bin", std::ios::binary) << "NSCRMAT1" << std::string(4, '\0');
    CHECK_THROWS_AS(load_dataset(dir / "bad.bin"), InputError);
}
