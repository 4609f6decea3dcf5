#include "dataset.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "json.hpp"
#include "rng.hpp"

namespace prunekit {

Tensor Normalization::apply(const Tensor& sample) const {
    Tensor out = sample;
    if (sample.rank() == 3) {
        const std::size_t plane = sample.dim(1) * sample.dim(2);
        for (std::size_t c = 0; c < sample.dim(0); ++c) {
            for (std::size_t k = 0; k < plane; ++k) {
                out[c * plane + k] = (sample[c * plane + k] - mean[c]) / stddev[c];
            }
        }
    } else {
        for (std::size_t k = 0; k < sample.size(); ++k) {
            out[k] = (sample[k] - mean[k]) / stddev[k];
        }
    }
    return out;
}

const std::vector<std::size_t>& Dataset::sample_shape() const {
    if (samples.empty()) throw data_error("dataset is empty");
    return samples.front().shape();
}

std::vector<std::size_t> Dataset::indices_of(Split split) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < splits.size(); ++i) {
        if (splits[i] == split) out.push_back(i);
    }
    return out;
}

std::size_t Dataset::count_of(Split split) const {
    std::size_t n = 0;
    for (Split s : splits) {
        if (s == split) ++n;
    }
    return n;
}

Normalization Dataset::fit_normalization() const {
    const auto& shape = sample_shape();
    const std::size_t channels = shape.size() == 3 ? shape[0] : shape[0];
    const std::size_t plane = shape.size() == 3 ? shape[1] * shape[2] : 1;

    Normalization norm;
    norm.mean.assign(channels, 0.0);
    norm.stddev.assign(channels, 0.0);

    std::size_t count = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (splits[i] != Split::train) continue;
        ++count;
        for (std::size_t c = 0; c < channels; ++c) {
            for (std::size_t k = 0; k < plane; ++k) norm.mean[c] += samples[i][c * plane + k];
        }
    }
    if (count == 0) throw data_error("dataset has no training samples");
    for (auto& m : norm.mean) m /= static_cast<double>(count * plane);

    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (splits[i] != Split::train) continue;
        for (std::size_t c = 0; c < channels; ++c) {
            for (std::size_t k = 0; k < plane; ++k) {
                const double d = samples[i][c * plane + k] - norm.mean[c];
                norm.stddev[c] += d * d;
            }
        }
    }
    for (auto& s : norm.stddev) {
        s = std::sqrt(s / static_cast<double>(count * plane));
        if (s < 1e-12) s = 1.0;
    }
    return norm;
}

void Dataset::assign_splits(std::uint64_t seed) {
    splits.assign(samples.size(), Split::train);
    std::vector<std::vector<std::size_t>> per_class(class_count());
    for (std::size_t i = 0; i < labels.size(); ++i) per_class[labels[i]].push_back(i);

    for (std::size_t c = 0; c < per_class.size(); ++c) {
        auto& ids = per_class[c];
        Rng rng = Rng::derive(seed, 0x5714, c);
        rng.shuffle(ids);
        const std::size_t n = ids.size();
        const std::size_t n_train = n * 8 / 10;
        const std::size_t n_val = n * 9 / 10 - n_train;
        for (std::size_t k = 0; k < n; ++k) {
            if (k < n_train) {
                splits[ids[k]] = Split::train;
            } else if (k < n_train + n_val) {
                splits[ids[k]] = Split::val;
            } else {
                splits[ids[k]] = Split::test;
            }
        }
    }
}

void Dataset::validate() const {
    if (samples.size() != labels.size() || samples.size() != splits.size()) {
        throw data_error("dataset arrays disagree in length");
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (labels[i] >= class_count()) {
            throw data_error("sample " + std::to_string(i) + " label " +
                             std::to_string(labels[i]) + " exceeds class count");
        }
        if (samples[i].shape() != samples.front().shape()) {
            throw data_error("sample " + std::to_string(i) + " shape differs");
        }
    }
}

namespace {

void append_f32_le(std::string& out, const std::vector<double>& values) {
    for (double v : values) {
        const float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, sizeof(bits));
        out.push_back(static_cast<char>(bits & 0xff));
        out.push_back(static_cast<char>((bits >> 8) & 0xff));
        out.push_back(static_cast<char>((bits >> 16) & 0xff));
        out.push_back(static_cast<char>((bits >> 24) & 0xff));
    }
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
    ds.validate();
    const auto& shape = ds.sample_shape();
    nlohmann::json header;
    header["format"] = kDatasetFormat;
    header["n"] = ds.samples.size();
    if (shape.size() == 3) {
        header["layout"] = "chw";
        header["channels"] = shape[0];
        header["height"] = shape[1];
        header["width"] = shape[2];
    } else {
        header["layout"] = "flat";
        header["channels"] = shape[0];
        header["height"] = 1;
        header["width"] = 1;
    }
    header["class_names"] = ds.class_names;
    auto labels = nlohmann::json::array();
    for (std::size_t l : ds.labels) labels.push_back(l);
    header["labels"] = labels;
    auto splits = nlohmann::json::array();
    for (Split s : ds.splits) splits.push_back(static_cast<int>(s));
    header["splits"] = splits;

    std::string payload;
    for (const auto& s : ds.samples) append_f32_le(payload, s.values());

    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write dataset '" + path + "'");
    out << header.dump() << "\n" << payload;
    if (!out) throw data_error("failed writing dataset '" + path + "'");
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open dataset '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw data_error("dataset '" + path + "' is empty");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw data_error("dataset '" + path + "' has a corrupt header: " + e.what());
    }
    const std::string format = header.value("format", "");
    if (format != kDatasetFormat) {
        throw data_error("dataset '" + path + "' has unsupported format '" + format +
                         "' (expected '" + kDatasetFormat + "')");
    }

    std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    try {
        const std::size_t n = header.at("n").get<std::size_t>();
        const std::string layout = header.at("layout").get<std::string>();
        const std::size_t channels = header.at("channels").get<std::size_t>();
        const std::size_t height = header.at("height").get<std::size_t>();
        const std::size_t width = header.at("width").get<std::size_t>();
        std::vector<std::size_t> shape;
        if (layout == "chw") {
            shape = {channels, height, width};
        } else if (layout == "flat") {
            shape = {channels};
        } else {
            throw data_error("dataset '" + path + "' has unknown layout '" + layout + "'");
        }
        const std::size_t per_sample = Tensor::numel(shape);
        if (payload.size() != n * per_sample * 4) {
            throw data_error("dataset '" + path + "' payload size mismatch");
        }

        Dataset ds;
        ds.class_names = header.at("class_names").get<std::vector<std::string>>();
        for (const auto& l : header.at("labels")) ds.labels.push_back(l.get<std::size_t>());
        for (const auto& s : header.at("splits")) {
            const int v = s.get<int>();
            if (v < 0 || v > 2) throw data_error("dataset '" + path + "' has invalid split tag");
            ds.splits.push_back(static_cast<Split>(v));
        }

        ds.samples.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> values(per_sample);
            for (std::size_t k = 0; k < per_sample; ++k) {
                const auto* p = reinterpret_cast<const unsigned char*>(payload.data() +
                                                                       (i * per_sample + k) * 4);
                const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                                           (static_cast<std::uint32_t>(p[1]) << 8) |
                                           (static_cast<std::uint32_t>(p[2]) << 16) |
                                           (static_cast<std::uint32_t>(p[3]) << 24);
                float f;
                std::memcpy(&f, &bits, sizeof(f));
                values[k] = static_cast<double>(f);
            }
            ds.samples.emplace_back(shape, std::move(values));
        }
        ds.validate();
        return ds;
    } catch (const nlohmann::json::exception& e) {
        throw data_error("dataset '" + path + "' has a corrupt header: " + e.what());
    }
}

namespace {

void load_csv_split(const std::string& file, Split split, Dataset& ds, std::size_t& dim) {
    std::ifstream in(file);
    if (!in) return;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<double> values;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                values.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw data_error(file + ":" + std::to_string(line_no) + ": not a number: '" +
                                 cell + "'");
            }
        }
        if (values.size() < 2) {
            throw data_error(file + ":" + std::to_string(line_no) + ": need label and features");
        }
        const double label = values.front();
        if (label < 0 || label != std::floor(label)) {
            throw data_error(file + ":" + std::to_string(line_no) + ": bad label");
        }
        values.erase(values.begin());
        if (dim == 0) dim = values.size();
        if (values.size() != dim) {
            throw data_error(file + ":" + std::to_string(line_no) + ": row width differs");
        }
        ds.samples.emplace_back(std::vector<std::size_t>{dim}, std::move(values));
        ds.labels.push_back(static_cast<std::size_t>(label));
        ds.splits.push_back(split);
    }
}

}  // namespace

Dataset load_csv_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw data_error("'" + dir + "' is not a directory");

    Dataset ds;
    std::size_t dim = 0;
    load_csv_split(dir + "/train.csv", Split::train, ds, dim);
    load_csv_split(dir + "/val.csv", Split::val, ds, dim);
    load_csv_split(dir + "/test.csv", Split::test, ds, dim);
    if (ds.samples.empty()) {
        throw data_error("no train.csv/val.csv/test.csv rows found under '" + dir + "'");
    }

    std::size_t max_label = 0;
    for (std::size_t l : ds.labels) max_label = std::max(max_label, l);

    std::ifstream names(dir + "/classes.txt");
    if (names) {
        std::string line;
        while (std::getline(names, line)) {
            if (!line.empty()) ds.class_names.push_back(line);
        }
    }
    while (ds.class_names.size() <= max_label) {
        ds.class_names.push_back("class" + std::to_string(ds.class_names.size()));
    }
    ds.validate();
    return ds;
}

}  // namespace prunekit
