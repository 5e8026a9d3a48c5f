// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#include "adlift/scene_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <sstream>

#include <json.hpp>

namespace adlift {

using nlohmann::json;

std::string format_double(double v) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument("cannot serialize non-finite value");
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void append_record(std::string& out, const Gaussian& g) {
    out += "    [";
    const double vals[kParamsPerGaussian] = {
        g.position[0],  g.position[1],  g.position[2],  g.log_scale[0], g.log_scale[1],
        g.log_scale[2], g.rotation[0],  g.rotation[1],  g.rotation[2],  g.rotation[3],
        g.color[0],     g.color[1],     g.color[2],     g.opacity_logit};
    for (int i = 0; i < kParamsPerGaussian; ++i) {
        if (i) out += ", ";
        out += format_double(vals[i]);
    }
    out += "]";
}

void append_list(std::string& out, const char* key, const std::vector<Gaussian>& gs) {
    out += "  \"";
    out += key;
    out += "\": [";
    for (std::size_t i = 0; i < gs.size(); ++i) {
        out += i ? ",\n" : "\n";
        append_record(out, gs[i]);
    }
    out += gs.empty() ? "]" : "\n  ]";
}

// Schema errors carry the offset of the offending key when it can be found.
std::size_t key_offset(const std::string& text, const std::string& key) {
    const auto pos = text.find("\"" + key + "\"");
    return pos == std::string::npos ? 0 : pos;
}

json parse_json(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string(what) + ": " + e.what(), e.byte);
    }
}

double number_at(const json& arr, std::size_t i, const std::string& text, const std::string& key) {
    const json& v = arr.at(i);
    if (!v.is_number()) {
        throw ParseError("'" + key + "' entry " + std::to_string(i) + " is not a number",
                         key_offset(text, key));
    }
    return v.get<double>();
}

std::vector<Gaussian> parse_records(const json& doc, const std::string& key,
                                    const std::string& text, bool& renormalized) {
    std::vector<Gaussian> out;
    if (!doc.contains(key)) {
        throw ParseError("missing key '" + key + "'", text.size());
    }
    const json& arr = doc.at(key);
    if (!arr.is_array()) {
        throw ParseError("'" + key + "' must be an array", key_offset(text, key));
    }
    out.reserve(arr.size());
    for (std::size_t r = 0; r < arr.size(); ++r) {
        const json& rec = arr[r];
        if (!rec.is_array() || rec.size() != kParamsPerGaussian) {
            throw ParseError("'" + key + "' record " + std::to_string(r) + " must have " +
                                 std::to_string(kParamsPerGaussian) + " numbers",
                             key_offset(text, key));
        }
        double v[kParamsPerGaussian];
        for (int i = 0; i < kParamsPerGaussian; ++i) {
            v[i] = number_at(rec, static_cast<std::size_t>(i), text, key);
        }
        Gaussian g;
        g.position = {v[0], v[1], v[2]};
        g.log_scale = {v[3], v[4], v[5]};
        g.rotation = {v[6], v[7], v[8], v[9]};
        g.color = {v[10], v[11], v[12]};
        g.opacity_logit = v[13];
        const double n = g.rotation.norm();
        if (!(n > 0.0) || !std::isfinite(n)) {
            throw ParseError("'" + key + "' record " + std::to_string(r) +
                                 " has a degenerate quaternion",
                             key_offset(text, key));
        }
        if (std::abs(n - 1.0) > 1e-9) {
            g.rotation /= n;
            renormalized = true;
        }
        out.push_back(g);
    }
    return out;
}

Eigen::Vector3d parse_vec3(const json& doc, const std::string& key, const std::string& text) {
    if (!doc.contains(key) || !doc.at(key).is_array() || doc.at(key).size() != 3) {
        throw ParseError("'" + key + "' must be an array of 3 numbers", key_offset(text, key));
    }
    const json& a = doc.at(key);
    return {number_at(a, 0, text, key), number_at(a, 1, text, key), number_at(a, 2, text, key)};
}

void check_version(const json& doc, const std::string& text) {
    if (!doc.is_object()) {
        throw ParseError("top level must be an object", 0);
    }
    if (!doc.contains("version") || !doc.at("version").is_number_integer()) {
        throw ParseError("missing integer 'version'", key_offset(text, "version"));
    }
    const auto version = doc.at("version").get<long long>();
    if (version != kSceneFormatVersion) {
        throw ParseError("unsupported version " + std::to_string(version),
                         key_offset(text, "version"));
    }
}

std::string text_of_file(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    return {bytes.begin(), bytes.end()};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

} // namespace

std::string serialize_scene(const Scene& scene) {
    std::string out = "{\n  \"version\": " + std::to_string(kSceneFormatVersion) + ",\n";
    out += "  \"background\": [" + format_double(scene.background[0]) + ", " +
           format_double(scene.background[1]) + ", " + format_double(scene.background[2]) +
           "],\n";
    append_list(out, "raw", scene.raw);
    out += ",\n";
    append_list(out, "safeguard", scene.safeguard);
    out += "\n}\n";
    return out;
}

LoadedScene parse_scene(const std::string& text) {
    const json doc = parse_json(text, "scene file");
    check_version(doc, text);
    LoadedScene result;
    result.scene.background = parse_vec3(doc, "background", text);
    result.scene.raw = parse_records(doc, "raw", text, result.renormalized_quaternions);
    result.scene.safeguard =
        parse_records(doc, "safeguard", text, result.renormalized_quaternions);
    return result;
}

void save_scene(const Scene& scene, const std::filesystem::path& path) {
    write_text(path, serialize_scene(scene));
}

LoadedScene load_scene(const std::filesystem::path& path) {
    return parse_scene(text_of_file(path));
}

std::string serialize_cameras(const std::vector<Camera>& cams) {
    std::string out = "{\n  \"version\": " + std::to_string(kSceneFormatVersion) +
                      ",\n  \"cameras\": [";
    for (std::size_t i = 0; i < cams.size(); ++i) {
        const Camera& c = cams[i];
        out += i ? ",\n    {" : "\n    {";
        out += "\"rotation_wc\": [";
        for (int r = 0; r < 3; ++r) {
            for (int k = 0; k < 3; ++k) {
                if (r || k) out += ", ";
                out += format_double(c.rotation_wc(r, k));
            }
        }
        out += "], \"translation_wc\": [" + format_double(c.translation_wc[0]) + ", " +
               format_double(c.translation_wc[1]) + ", " + format_double(c.translation_wc[2]) +
               "]";
        out += ", \"fx\": " + format_double(c.fx) + ", \"fy\": " + format_double(c.fy);
        out += ", \"cx\": " + format_double(c.cx) + ", \"cy\": " + format_double(c.cy);
        out += ", \"width\": " + std::to_string(c.width) +
               ", \"height\": " + std::to_string(c.height);
        out += ", \"znear\": " + format_double(c.znear) + "}";
    }
    out += cams.empty() ? "]\n}\n" : "\n  ]\n}\n";
    return out;
}

std::vector<Camera> parse_cameras(const std::string& text) {
    const json doc = parse_json(text, "camera file");
    check_version(doc, text);
    if (!doc.contains("cameras") || !doc.at("cameras").is_array()) {
        throw ParseError("missing array 'cameras'", key_offset(text, "cameras"));
    }
    std::vector<Camera> cams;
    const json& arr = doc.at("cameras");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const json& c = arr[i];
        const std::size_t where = key_offset(text, "cameras");
        try {
            Camera cam;
            const auto rot = c.at("rotation_wc").get<std::vector<double>>();
            const auto tr = c.at("translation_wc").get<std::vector<double>>();
            if (rot.size() != 9 || tr.size() != 3) {
                throw ParseError("camera " + std::to_string(i) + " has malformed extrinsics",
                                 where);
            }
            for (int r = 0; r < 3; ++r) {
                for (int k = 0; k < 3; ++k) {
                    cam.rotation_wc(r, k) = rot[static_cast<std::size_t>(3 * r + k)];
                }
            }
            cam.translation_wc = {tr[0], tr[1], tr[2]};
            cam.fx = c.at("fx").get<double>();
            cam.fy = c.at("fy").get<double>();
            cam.cx = c.at("cx").get<double>();
            cam.cy = c.at("cy").get<double>();
            cam.width = c.at("width").get<int>();
            cam.height = c.at("height").get<int>();
            cam.znear = c.at("znear").get<double>();
            validate_camera(cam);
            cams.push_back(cam);
        } catch (const json::exception& e) {
            throw ParseError("camera " + std::to_string(i) + ": " + e.what(), where);
        } catch (const std::invalid_argument& e) {
            throw ParseError("camera " + std::to_string(i) + ": " + e.what(), where);
        }
    }
    return cams;
}

void save_cameras(const std::vector<Camera>& cams, const std::filesystem::path& path) {
    write_text(path, serialize_cameras(cams));
}

std::vector<Camera> load_cameras(const std::filesystem::path& path) {
    return parse_cameras(text_of_file(path));
}

// ---------------------------------------------------------------------------
// PLY

namespace {

struct PlyProperty {
    std::string name;
    std::string type;
    int size = 0;
    std::size_t offset = 0;
};

int ply_type_size(const std::string& t) {
    static const std::map<std::string, int> sizes = {
        {"char", 1},   {"uchar", 1},  {"int8", 1},   {"uint8", 1},   {"short", 2},
        {"ushort", 2}, {"int16", 2},  {"uint16", 2}, {"int", 4},     {"uint", 4},
        {"int32", 4},  {"uint32", 4}, {"float", 4},  {"float32", 4}, {"double", 8},
        {"float64", 8}};
    const auto it = sizes.find(t);
    return it == sizes.end() ? 0 : it->second;
}

double read_ply_scalar(const std::uint8_t* p, const std::string& t) {
    std::uint64_t raw = 0;
    const int n = ply_type_size(t);
    for (int i = 0; i < n; ++i) {
        raw |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    }
    if (t == "float" || t == "float32") return std::bit_cast<float>(static_cast<std::uint32_t>(raw));
    if (t == "double" || t == "float64") return std::bit_cast<double>(raw);
    if (t == "char" || t == "int8") return static_cast<std::int8_t>(raw);
    if (t == "short" || t == "int16") return static_cast<std::int16_t>(raw);
    if (t == "int" || t == "int32") return static_cast<std::int32_t>(raw);
    return static_cast<double>(raw);
}

} // namespace

LoadedScene import_ply(const std::vector<std::uint8_t>& bytes) {
    const std::string marker = "end_header\n";
    const auto it = std::search(bytes.begin(), bytes.end(), marker.begin(), marker.end());
    if (it == bytes.end()) {
        throw ParseError("PLY: missing end_header", bytes.size());
    }
    const std::size_t body_start = static_cast<std::size_t>(it - bytes.begin()) + marker.size();
    std::istringstream header(std::string(bytes.begin(), it));

    std::string line;
    std::size_t line_offset = 0;
    std::size_t vertex_count = 0;
    bool in_vertex = false;
    bool seen_vertex = false;
    bool format_ok = false;
    std::vector<PlyProperty> props;
    std::size_t stride = 0;
    while (std::getline(header, line)) {
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt != "binary_little_endian") {
                throw ParseError("PLY: only binary_little_endian is supported", line_offset);
            }
            format_ok = true;
        } else if (word == "element") {
            std::string name;
            std::size_t count = 0;
            ls >> name >> count;
            if (name == "vertex") {
                if (seen_vertex) throw ParseError("PLY: duplicate vertex element", line_offset);
                vertex_count = count;
                in_vertex = seen_vertex = true;
            } else {
                if (!seen_vertex) {
                    throw ParseError("PLY: vertex must be the first element", line_offset);
                }
                in_vertex = false;
            }
        } else if (word == "property" && in_vertex) {
            PlyProperty p;
            ls >> p.type >> p.name;
            if (p.type == "list") {
                throw ParseError("PLY: list properties on vertex are not supported", line_offset);
            }
            p.size = ply_type_size(p.type);
            if (p.size == 0) {
                throw ParseError("PLY: unknown property type '" + p.type + "'", line_offset);
            }
            p.offset = stride;
            stride += static_cast<std::size_t>(p.size);
            props.push_back(p);
        }
        line_offset += line.size() + 1;
    }
    if (!format_ok) throw ParseError("PLY: missing format line", 0);
    if (!seen_vertex) throw ParseError("PLY: no vertex element", body_start);

    static const char* required[] = {"x",     "y",     "z",     "scale_0", "scale_1",
                                     "scale_2", "rot_0", "rot_1", "rot_2",   "rot_3",
                                     "opacity", "f_dc_0", "f_dc_1", "f_dc_2"};
    const PlyProperty* lookup[kParamsPerGaussian];
    for (int i = 0; i < kParamsPerGaussian; ++i) {
        lookup[i] = nullptr;
        for (const auto& p : props) {
            if (p.name == required[i]) lookup[i] = &p;
        }
        if (!lookup[i]) {
            throw ParseError(std::string("PLY: missing vertex property '") + required[i] + "'",
                             body_start);
        }
    }
    const std::size_t need = vertex_count * stride;
    if (bytes.size() - body_start < need) {
        throw ParseError("PLY: vertex data truncated", bytes.size());
    }

    LoadedScene result;
    result.scene.raw.reserve(vertex_count);
    for (std::size_t v = 0; v < vertex_count; ++v) {
        const std::uint8_t* row = bytes.data() + body_start + v * stride;
        double val[kParamsPerGaussian];
        for (int i = 0; i < kParamsPerGaussian; ++i) {
            val[i] = read_ply_scalar(row + lookup[i]->offset, lookup[i]->type);
            if (!std::isfinite(val[i])) {
                throw ParseError("PLY: non-finite value in vertex " + std::to_string(v),
                                 body_start + v * stride + lookup[i]->offset);
            }
        }
        Gaussian g;
        g.position = {val[0], val[1], val[2]};
        g.log_scale = {val[3], val[4], val[5]};
        g.rotation = {val[6], val[7], val[8], val[9]};
        g.opacity_logit = val[10];
        for (int k = 0; k < 3; ++k) {
            g.color[k] = std::clamp(0.5 + kShC0 * val[11 + k], 0.0, 1.0);
        }
        const double n = g.rotation.norm();
        if (!(n > 0.0)) {
            throw ParseError("PLY: zero quaternion in vertex " + std::to_string(v),
                             body_start + v * stride);
        }
        if (std::abs(n - 1.0) > 1e-9) {
            g.rotation /= n;
            result.renormalized_quaternions = true;
        }
        result.scene.raw.push_back(g);
    }
    return result;
}

LoadedScene import_ply(const std::filesystem::path& path) {
    return import_ply(read_file_bytes(path));
}

} // namespace adlift
