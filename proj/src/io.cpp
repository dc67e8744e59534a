#include "tdfmatch/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace tdfmatch {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

// PGM token reader: skips whitespace and '#' comment lines.
std::string next_pgm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
        } else if (!std::isspace(c)) {
            tok.push_back(static_cast<char>(c));
            while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#') {
                tok.push_back(static_cast<char>(in.get()));
            }
            return tok;
        }
    }
    return tok;
}

std::vector<double> read_reals(const std::string& path, size_t expected) {
    std::ifstream in(path);
    if (!in) fail(path, "cannot open");
    std::vector<double> vals;
    double v;
    while (in >> v) vals.push_back(v);
    if (vals.size() != expected) {
        fail(path, "expected " + std::to_string(expected) + " values, got " +
                       std::to_string(vals.size()));
    }
    return vals;
}

}  // namespace

DepthImage read_depth_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    if (next_pgm_token(in) != "P5") fail(path, "bad magic, expected P5");
    DepthImage img;
    try {
        img.width = std::stoi(next_pgm_token(in));
        img.height = std::stoi(next_pgm_token(in));
        const int maxval = std::stoi(next_pgm_token(in));
        if (maxval != 65535) fail(path, "expected maxval 65535");
    } catch (const std::invalid_argument&) {
        fail(path, "malformed header");
    }
    if (img.width <= 0 || img.height <= 0) fail(path, "bad dimensions");
    // Exactly one whitespace byte separates the header from the samples.
    const int sep = in.get();
    if (sep == EOF || !std::isspace(sep)) fail(path, "malformed header");
    const size_t n = static_cast<size_t>(img.width) * img.height;
    std::vector<unsigned char> raw(n * 2);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<size_t>(in.gcount()) != raw.size()) fail(path, "unexpected end of file");
    img.depth_m.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const unsigned mm = (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
        img.depth_m[i] = mm / 1000.0;
    }
    return img;
}

void write_depth_pgm(const std::string& path, const DepthImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");
    out << "P5\n" << img.width << " " << img.height << "\n65535\n";
    std::vector<unsigned char> raw;
    raw.reserve(img.depth_m.size() * 2);
    for (double d : img.depth_m) {
        const long mm = std::lround(std::clamp(d, 0.0, 65.535) * 1000.0);
        raw.push_back(static_cast<unsigned char>((mm >> 8) & 0xff));
        raw.push_back(static_cast<unsigned char>(mm & 0xff));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) fail(path, "write failed");
}

IntrinsicsMatrix read_intrinsics(const std::string& path) {
    const std::vector<double> m = read_reals(path, 9);
    const double tol = 1e-9;
    if (std::abs(m[1]) > tol || std::abs(m[3]) > tol || std::abs(m[6]) > tol ||
        std::abs(m[7]) > tol || std::abs(m[8] - 1.0) > tol) {
        fail(path, "not a pinhole intrinsics matrix");
    }
    return {m[0], m[4], m[2], m[5]};
}

void write_intrinsics(const std::string& path, const IntrinsicsMatrix& k) {
    std::ofstream out(path);
    if (!out) fail(path, "cannot open for writing");
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.17g 0 %.17g\n0 %.17g %.17g\n0 0 1\n", k.fx, k.cx, k.fy,
                  k.cy);
    out << buf;
}

RigidTransform read_pose(const std::string& path, bool invert) {
    const std::vector<double> m = read_reals(path, 16);
    const double tol = 1e-9;
    if (std::abs(m[12]) > tol || std::abs(m[13]) > tol || std::abs(m[14]) > tol ||
        std::abs(m[15] - 1.0) > tol) {
        fail(path, "bottom row must be 0 0 0 1");
    }
    RigidTransform t;
    t.rotation << m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10];
    t.translation << m[3], m[7], m[11];
    try {
        validate_transform(t);
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
    return invert ? tdfmatch::invert(t) : t;
}

void write_pose(const std::string& path, const RigidTransform& t) {
    std::ofstream out(path);
    if (!out) fail(path, "cannot open for writing");
    char buf[512];
    for (int r = 0; r < 3; ++r) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g\n", t.rotation(r, 0),
                      t.rotation(r, 1), t.rotation(r, 2), t.translation(r));
        out << buf;
    }
    out << "0 0 0 1\n";
}

PointCloud read_ply(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(path, "cannot open");
    std::string line;
    if (!std::getline(in, line) || line != "ply") fail(path, "bad magic, expected ply");
    size_t count = 0;
    std::vector<std::string> props;
    bool ascii = false;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string kw;
        ls >> kw;
        if (kw == "format") {
            std::string f;
            ls >> f;
            ascii = (f == "ascii");
        } else if (kw == "element") {
            std::string name;
            ls >> name >> count;
            if (name != "vertex") fail(path, "unsupported element " + name);
        } else if (kw == "property") {
            std::string type, name;
            ls >> type >> name;
            if (type != "float") fail(path, "unsupported property type " + type);
            props.push_back(name);
        } else if (kw == "end_header") {
            break;
        } else if (kw == "comment") {
            continue;
        } else {
            fail(path, "unsupported header line: " + line);
        }
    }
    if (!ascii) fail(path, "only ascii format supported");
    if (props != std::vector<std::string>{"x", "y", "z"}) {
        fail(path, "expected exactly properties float x, float y, float z");
    }
    PointCloud cloud;
    cloud.points.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        double x, y, z;
        if (!(in >> x >> y >> z)) fail(path, "unexpected end of file");
        // Snap to the declared float precision so write/read round trips.
        cloud.points.emplace_back(static_cast<float>(x), static_cast<float>(y),
                                  static_cast<float>(z));
    }
    return cloud;
}

void write_ply(const std::string& path, const PointCloud& cloud) {
    std::ofstream out(path);
    if (!out) fail(path, "cannot open for writing");
    out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
        << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
    char buf[128];
    for (const Point3& p : cloud.points) {
        std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g\n", static_cast<double>(static_cast<float>(p.x)),
                      static_cast<double>(static_cast<float>(p.y)),
                      static_cast<double>(static_cast<float>(p.z)));
        out << buf;
    }
    if (!out) fail(path, "write failed");
}

void write_heat_ply(const std::string& path, const PointCloud& cloud,
                    const std::vector<double>& heat) {
    if (cloud.size() != heat.size()) {
        throw std::runtime_error("heat values must parallel the cloud");
    }
    std::ofstream out(path);
    if (!out) fail(path, "cannot open for writing");
    out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
        << "\nproperty float x\nproperty float y\nproperty float z\nproperty float heat\nend_header\n";
    char buf[160];
    for (size_t i = 0; i < cloud.size(); ++i) {
        const Point3& p = cloud.points[i];
        std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g %.9g\n",
                      static_cast<double>(static_cast<float>(p.x)),
                      static_cast<double>(static_cast<float>(p.y)),
                      static_cast<double>(static_cast<float>(p.z)), heat[i]);
        out << buf;
    }
    if (!out) fail(path, "write failed");
}

std::vector<DepthFrame> load_scene_dir(const std::string& dir, bool invert_poses) {
    const fs::path root(dir);
    if (!fs::is_directory(root)) fail(dir, "not a directory");
    const fs::path intr_path = root / "camera-intrinsics.txt";
    if (!fs::exists(intr_path)) fail(intr_path.string(), "missing intrinsics file");
    const IntrinsicsMatrix km = read_intrinsics(intr_path.string());

    std::vector<std::string> depth_files;
    for (const auto& entry : fs::directory_iterator(root)) {
        const std::string name = entry.path().filename().string();
        if (name.starts_with("frame-") && name.ends_with(".depth.pgm")) {
            depth_files.push_back(name);
        }
    }
    std::sort(depth_files.begin(), depth_files.end());
    if (depth_files.empty()) fail(dir, "no frame-*.depth.pgm files");

    std::vector<DepthFrame> frames;
    frames.reserve(depth_files.size());
    for (const std::string& name : depth_files) {
        const std::string stem = name.substr(0, name.size() - std::string(".depth.pgm").size());
        const fs::path pose_path = root / (stem + ".pose.txt");
        if (!fs::exists(pose_path)) fail(pose_path.string(), "missing pose file");
        const DepthImage img = read_depth_pgm((root / name).string());
        const CameraIntrinsics k(km.fx, km.fy, km.cx, km.cy, img.width, img.height);
        frames.emplace_back(img.depth_m, k, read_pose(pose_path.string(), invert_poses));
    }
    return frames;
}

}  // namespace tdfmatch
