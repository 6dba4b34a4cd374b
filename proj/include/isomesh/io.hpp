#pragma once

#include "isomesh/core.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace isomesh {

struct ParseError : std::runtime_error {
    ParseError(const std::string& path, int line, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line(line) {}
    int line;
};

namespace detail {

inline std::string lower_ext(const std::string& path) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    for (char& c : ext) c = static_cast<char>(std::tolower(c));
    return ext;
}

inline std::string fmt_coord(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return buf;
}

// Parses "3" or "3/1/2" style OBJ face corners into a 0-based vertex index.
inline int obj_corner_index(const std::string& token, int vertexCount, const std::string& path,
                            int line) {
    const std::string head = token.substr(0, token.find('/'));
    int idx = 0;
    try {
        idx = std::stoi(head);
    } catch (...) {
        throw ParseError(path, line, "bad face index '" + token + "'");
    }
    if (idx < 0) idx = vertexCount + idx + 1;  // OBJ negative indices
    if (idx < 1 || idx > vertexCount) throw ParseError(path, line, "face index out of range");
    return idx - 1;
}

struct ObjData {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
};

inline ObjData load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    ObjData data;
    std::string lineStr;
    int lineNo = 0;
    while (std::getline(in, lineStr)) {
        ++lineNo;
        std::istringstream ss(lineStr);
        std::string tag;
        if (!(ss >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ss >> x >> y >> z)) throw ParseError(path, lineNo, "malformed vertex");
            data.vertices.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<std::string> corners;
            std::string tok;
            while (ss >> tok) corners.push_back(tok);
            if (corners.size() != 3)
                throw ParseError(path, lineNo, "non-triangular face with " +
                                                   std::to_string(corners.size()) + " vertices");
            std::array<int, 3> f;
            for (int k = 0; k < 3; ++k)
                f[k] = obj_corner_index(corners[k], static_cast<int>(data.vertices.size()),
                                        path, lineNo);
            data.faces.push_back(f);
        }
        // vn/vt/usemtl etc. are ignored.
    }
    return data;
}

struct PlyData {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
};

inline PlyData load_ply(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string lineStr;
    int lineNo = 0;
    long nVerts = -1, nFaces = 0;
    bool headerDone = false;
    // Header: ascii format only, vertex x/y/z as leading properties.
    std::string currentElement;
    while (!headerDone && std::getline(in, lineStr)) {
        ++lineNo;
        std::istringstream ss(lineStr);
        std::string tag;
        ss >> tag;
        if (lineNo == 1 && tag != "ply") throw ParseError(path, lineNo, "missing ply magic");
        if (tag == "format") {
            std::string fmt;
            ss >> fmt;
            if (fmt != "ascii") throw ParseError(path, lineNo, "only ascii PLY is supported");
        } else if (tag == "element") {
            long n;
            ss >> currentElement >> n;
            if (currentElement == "vertex") nVerts = n;
            else if (currentElement == "face") nFaces = n;
        } else if (tag == "end_header") {
            headerDone = true;
        }
    }
    if (!headerDone || nVerts < 0) throw ParseError(path, lineNo, "incomplete PLY header");

    PlyData data;
    data.vertices.reserve(nVerts);
    for (long i = 0; i < nVerts; ++i) {
        if (!std::getline(in, lineStr)) throw ParseError(path, ++lineNo, "unexpected end of file");
        ++lineNo;
        std::istringstream ss(lineStr);
        double x, y, z;
        if (!(ss >> x >> y >> z)) throw ParseError(path, lineNo, "malformed vertex");
        data.vertices.emplace_back(x, y, z);
    }
    for (long i = 0; i < nFaces; ++i) {
        if (!std::getline(in, lineStr)) throw ParseError(path, ++lineNo, "unexpected end of file");
        ++lineNo;
        std::istringstream ss(lineStr);
        int n;
        if (!(ss >> n)) throw ParseError(path, lineNo, "malformed face");
        if (n != 3) throw ParseError(path, lineNo, "non-triangular face with " +
                                                       std::to_string(n) + " vertices");
        std::array<int, 3> f;
        for (int k = 0; k < 3; ++k) {
            if (!(ss >> f[k]) || f[k] < 0 || f[k] >= static_cast<int>(data.vertices.size()))
                throw ParseError(path, lineNo, "face index out of range");
        }
        data.faces.push_back(f);
    }
    return data;
}

}  // namespace detail

inline TriangleMesh load_mesh(const std::string& path) {
    const std::string ext = detail::lower_ext(path);
    TriangleMesh mesh;
    if (ext == "obj") {
        auto data = detail::load_obj(path);
        mesh.vertices = std::move(data.vertices);
        mesh.patches = std::move(data.faces);
    } else if (ext == "ply") {
        auto data = detail::load_ply(path);
        mesh.vertices = std::move(data.vertices);
        mesh.patches = std::move(data.faces);
    } else {
        throw std::runtime_error("unsupported mesh format '" + ext + "' for '" + path + "'");
    }
    return mesh;
}

inline void save_mesh(const TriangleMesh& mesh, const std::string& path) {
    const std::string ext = detail::lower_ext(path);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    if (ext == "obj") {
        for (const auto& v : mesh.vertices)
            out << "v " << detail::fmt_coord(v.x()) << ' ' << detail::fmt_coord(v.y()) << ' '
                << detail::fmt_coord(v.z()) << '\n';
        for (const auto& f : mesh.patches)
            out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    } else if (ext == "ply") {
        out << "ply\nformat ascii 1.0\n";
        out << "element vertex " << mesh.vertices.size() << '\n';
        out << "property double x\nproperty double y\nproperty double z\n";
        out << "element face " << mesh.patches.size() << '\n';
        out << "property list uchar int vertex_indices\nend_header\n";
        for (const auto& v : mesh.vertices)
            out << detail::fmt_coord(v.x()) << ' ' << detail::fmt_coord(v.y()) << ' '
                << detail::fmt_coord(v.z()) << '\n';
        for (const auto& f : mesh.patches)
            out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
    } else {
        throw std::runtime_error("unsupported mesh format '" + ext + "' for '" + path + "'");
    }
}

inline PointCloud load_cloud(const std::string& path) {
    const std::string ext = detail::lower_ext(path);
    PointCloud cloud;
    if (ext == "xyz") {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open '" + path + "'");
        std::string lineStr;
        int lineNo = 0;
        while (std::getline(in, lineStr)) {
            ++lineNo;
            std::istringstream ss(lineStr);
            double x, y, z;
            std::string first;
            if (!(ss >> first)) continue;  // blank line
            if (first[0] == '#') continue;
            try {
                x = std::stod(first);
            } catch (...) {
                throw ParseError(path, lineNo, "malformed point");
            }
            if (!(ss >> y >> z)) throw ParseError(path, lineNo, "malformed point");
            cloud.points.emplace_back(x, y, z);
        }
    } else if (ext == "obj") {
        cloud.points = detail::load_obj(path).vertices;
    } else if (ext == "ply") {
        cloud.points = detail::load_ply(path).vertices;
    } else {
        throw std::runtime_error("unsupported cloud format '" + ext + "' for '" + path + "'");
    }
    if (cloud.empty()) throw std::runtime_error("'" + path + "' contains no points");
    for (const auto& p : cloud.points)
        if (!p.allFinite()) throw std::runtime_error("'" + path + "' contains non-finite points");
    return cloud;
}

inline void save_cloud(const PointCloud& cloud, const std::string& path) {
    const std::string ext = detail::lower_ext(path);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    if (ext == "xyz") {
        for (const auto& p : cloud.points)
            out << detail::fmt_coord(p.x()) << ' ' << detail::fmt_coord(p.y()) << ' '
                << detail::fmt_coord(p.z()) << '\n';
    } else if (ext == "obj") {
        for (const auto& p : cloud.points)
            out << "v " << detail::fmt_coord(p.x()) << ' ' << detail::fmt_coord(p.y()) << ' '
                << detail::fmt_coord(p.z()) << '\n';
    } else if (ext == "ply") {
        out << "ply\nformat ascii 1.0\n";
        out << "element vertex " << cloud.size() << '\n';
        out << "property double x\nproperty double y\nproperty double z\n";
        out << "element face 0\nproperty list uchar int vertex_indices\nend_header\n";
        for (const auto& p : cloud.points)
            out << detail::fmt_coord(p.x()) << ' ' << detail::fmt_coord(p.y()) << ' '
                << detail::fmt_coord(p.z()) << '\n';
    } else {
        throw std::runtime_error("unsupported cloud format '" + ext + "' for '" + path + "'");
    }
}

}  // namespace isomesh
