/*
 * Copyright 2026 The HMTML Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#include "hmtml/model_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "hmtml/error.hpp"

namespace hmtml {

namespace {

void write_blocks(std::ostream& out, const char* magic, const std::vector<Eigen::MatrixXd>& blocks) {
    require(!blocks.empty(), "write: no matrices");
    const Eigen::Index cols = blocks.front().cols();
    for (const auto& b : blocks) require(b.cols() == cols, "write: column counts differ");
    out << magic << " v1 " << blocks.size() << ' ' << cols << '\n';
    char buf[32];
    for (std::size_t m = 0; m < blocks.size(); ++m) {
        const auto& b = blocks[m];
        out << (m + 1) << ' ' << b.rows() << '\n';
        for (Eigen::Index i = 0; i < b.rows(); ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", b(i, j));
                out << (j ? " " : "") << buf;
            }
            out << '\n';
        }
    }
    if (!out) throw IngestionError("write: stream failure");
}

class LineReader {
public:
    LineReader(std::istream& in, const std::string& source) : in_(in), source_(source) {}

    std::istringstream next() {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_;
            if (line.find_first_not_of(" \t\r") != std::string::npos) return std::istringstream(line);
        }
        fail("unexpected end of input");
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw IngestionError(source_ + ":" + std::to_string(line_) + ": " + what);
    }

private:
    std::istream& in_;
    const std::string& source_;
    std::size_t line_ = 0;
};

double parse_value(const std::string& token, const LineReader& reader) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size()) reader.fail("bad value '" + token + "'");
    if (!std::isfinite(v)) reader.fail("non-finite value");
    return v;
}

std::vector<Eigen::MatrixXd> read_blocks(std::istream& in, const std::string& source,
                                         const std::string& magic) {
    LineReader reader(in, source);
    auto head = reader.next();
    std::string tag, version;
    long count = 0, cols = 0;
    if (!(head >> tag >> version >> count >> cols) || tag != magic || version != "v1")
        reader.fail("expected header '" + magic + " v1 <M> <cols>'");
    if (count < 1 || cols < 1) reader.fail("header counts must be positive");

    std::vector<Eigen::MatrixXd> blocks;
    for (long m = 1; m <= count; ++m) {
        auto intro = reader.next();
        long index = 0, rows = 0;
        if (!(intro >> index >> rows) || index != m || rows < 1)
            reader.fail("expected block header '" + std::to_string(m) + " <rows>'");
        Eigen::MatrixXd b(rows, cols);
        for (long i = 0; i < rows; ++i) {
            auto row = reader.next();
            std::string token;
            long j = 0;
            for (; row >> token; ++j) {
                if (j >= cols) reader.fail("too many values in row");
                b(i, j) = parse_value(token, reader);
            }
            if (j != cols) reader.fail("expected " + std::to_string(cols) + " values");
        }
        blocks.push_back(std::move(b));
    }
    return blocks;
}

}  // namespace

void write_model(std::ostream& out, const std::vector<FactorMatrix>& factors) {
    write_blocks(out, "HMTML", factors);
}

std::vector<FactorMatrix> read_model(std::istream& in, const std::string& source) {
    return read_blocks(in, source, "HMTML");
}

void save_model(const std::string& path, const std::vector<FactorMatrix>& factors) {
    std::ofstream out(path);
    if (!out) throw IngestionError(path + ": cannot open for writing");
    write_model(out, factors);
}

std::vector<FactorMatrix> load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError(path + ": cannot open file");
    return read_model(in, path);
}

void write_task_weights(std::ostream& out, const std::vector<Eigen::MatrixXd>& weights) {
    write_blocks(out, "HMTML-W", weights);
}

std::vector<Eigen::MatrixXd> read_task_weights(std::istream& in, const std::string& source) {
    return read_blocks(in, source, "HMTML-W");
}

void save_task_weights(const std::string& path, const std::vector<Eigen::MatrixXd>& weights) {
    std::ofstream out(path);
    if (!out) throw IngestionError(path + ": cannot open for writing");
    write_task_weights(out, weights);
}

std::vector<Eigen::MatrixXd> load_task_weights(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError(path + ": cannot open file");
    return read_task_weights(in, path);
}

}  // namespace hmtml
