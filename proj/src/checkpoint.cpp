#include "hyp2nav/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace hyp2nav::ckpt {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw std::runtime_error("checkpoint '" + path + "': " + why);
}

json read_header(std::ifstream& in, const std::string& path) {
    char magic[8];
    std::uint32_t version = 0;
    std::uint64_t hlen = 0;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&hlen), 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) fail(path, "bad magic");
    if (version != kVersion) fail(path, "unsupported version " + std::to_string(version));
    std::string text(hlen, '\0');
    in.read(text.data(), std::streamsize(hlen));
    if (!in) fail(path, "truncated header");
    json h = json::parse(text, nullptr, false);
    if (h.is_discarded() || !h.contains("params")) fail(path, "malformed header");
    return h;
}

}  // namespace

void save(const std::string& path, const std::vector<const ad::Param*>& params,
          const std::string& meta_json) {
    json header;
    header["format_version"] = kVersion;
    header["meta"] = meta_json.empty() ? json::object() : json::parse(meta_json);
    json plist = json::array();
    for (const auto* p : params) {
        plist.push_back({{"name", p->name},
                         {"rows", p->rows},
                         {"cols", p->cols},
                         {"manifold", p->on_manifold}});
    }
    header["params"] = plist;
    const std::string text = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(path, "cannot open for writing");
    out.write(kMagic, 8);
    const std::uint32_t version = kVersion;
    const std::uint64_t hlen = text.size();
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&hlen), 8);
    out.write(text.data(), std::streamsize(text.size()));
    for (const auto* p : params) {
        out.write(reinterpret_cast<const char*>(p->value.data()),
                  std::streamsize(p->size() * sizeof(double)));
    }
    if (!out) fail(path, "write failed");
}

void load(const std::string& path, const std::vector<ad::Param*>& params) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    json header = read_header(in, path);

    std::map<std::string, ad::Param*> by_name;
    for (auto* p : params) by_name[p->name] = p;

    std::size_t matched = 0;
    for (const auto& d : header["params"]) {
        const std::string name = d["name"].get<std::string>();
        const std::size_t rows = d["rows"].get<std::size_t>();
        const std::size_t cols = d["cols"].get<std::size_t>();
        auto it = by_name.find(name);
        if (it == by_name.end()) fail(path, "stored param '" + name + "' has no target");
        ad::Param& p = *it->second;
        if (p.rows != rows || p.cols != cols) {
            fail(path, "shape mismatch for '" + name + "': stored " + std::to_string(rows) +
                           "x" + std::to_string(cols) + ", target " + std::to_string(p.rows) +
                           "x" + std::to_string(p.cols));
        }
        in.read(reinterpret_cast<char*>(p.value.data()),
                std::streamsize(p.size() * sizeof(double)));
        if (!in) fail(path, "truncated data for '" + name + "'");
        ++matched;
    }
    if (matched != params.size()) {
        fail(path, "file stores " + std::to_string(matched) + " params, model has " +
                       std::to_string(params.size()));
    }
}

std::string read_meta(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    json header = read_header(in, path);
    return header["meta"].dump();
}

}  // namespace hyp2nav::ckpt
