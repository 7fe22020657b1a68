#include "rsav/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "rsav/error.hpp"

namespace rsav {

namespace fs = std::filesystem;

namespace {

void skip_ws_and_comments(std::istream& in) {
    while (true) {
        const int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (c != EOF && std::isspace(c)) {
            in.get();
        } else {
            return;
        }
    }
}

long read_header_int(std::istream& in, const fs::path& path, const char* what) {
    skip_ws_and_comments(in);
    long v = -1;
    if (!(in >> v) || v < 0)
        throw IoError("malformed PGM header (" + std::string(what) + ") in " + path.string());
    return v;
}

void ensure_parent(const fs::path& path) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
}

} // namespace

GrayscaleImage read_pgm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || (magic[1] != '2' && magic[1] != '5'))
        throw IoError("not a P2/P5 PGM file: " + path.string());
    const bool binary = magic[1] == '5';
    GrayscaleImage img;
    img.width = static_cast<int>(read_header_int(in, path, "width"));
    img.height = static_cast<int>(read_header_int(in, path, "height"));
    const long maxval = read_header_int(in, path, "maxval");
    if (img.width <= 0 || img.height <= 0 || maxval <= 0 || maxval > 65535)
        throw IoError("unsupported PGM dimensions or maxval in " + path.string());
    const std::size_t count = static_cast<std::size_t>(img.width) * img.height;
    img.pixels.resize(count);
    if (binary) {
        in.get(); // single whitespace after maxval
        const int bytes = maxval < 256 ? 1 : 2;
        std::vector<unsigned char> raw(count * bytes);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (static_cast<std::size_t>(in.gcount()) != raw.size())
            throw IoError("truncated PGM payload in " + path.string());
        for (std::size_t k = 0; k < count; ++k) {
            const long v = bytes == 1 ? raw[k] : (raw[2 * k] << 8) | raw[2 * k + 1];
            img.pixels[k] = static_cast<double>(std::min(v, maxval)) / maxval;
        }
    } else {
        for (std::size_t k = 0; k < count; ++k) {
            skip_ws_and_comments(in);
            long v;
            if (!(in >> v))
                throw IoError("truncated PGM payload in " + path.string());
            if (v < 0 || v > maxval)
                throw IoError("PGM sample out of range in " + path.string());
            img.pixels[k] = static_cast<double>(v) / maxval;
        }
    }
    return img;
}

void write_pgm(const GrayscaleImage& img, const fs::path& path) {
    if (img.width <= 0 || img.height <= 0 ||
        img.pixels.size() != static_cast<std::size_t>(img.width) * img.height)
        throw IoError("image dimensions do not match its pixel buffer");
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    std::vector<unsigned char> raw(img.pixels.size());
    for (std::size_t k = 0; k < raw.size(); ++k) {
        const double v = std::clamp(img.pixels[k], 0.0, 1.0);
        raw[k] = static_cast<unsigned char>(std::floor(v * 255.0 + 0.5));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out)
        throw IoError("failed writing " + path.string());
}

NodalField image_to_field(const GrayscaleImage& img, const Mesh& mesh, std::string* warning) {
    if (mesh.dim != 2)
        throw ConfigError("images can only be mapped onto 2D meshes");
    const int gw = mesh.nx + 1, gh = mesh.ny + 1;
    const bool exact = img.width == gw && img.height == gh;
    if (!exact && warning)
        *warning = "image is " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                   ", mesh grid is " + std::to_string(gw) + "x" + std::to_string(gh) +
                   "; resampling by nearest neighbour";
    NodalField out(mesh.num_nodes());
    for (int j = 0; j < gh; ++j) {
        for (int i = 0; i < gw; ++i) {
            int pi = i, pj = j;
            if (!exact) {
                pi = static_cast<int>(std::lround(static_cast<double>(i) * (img.width - 1) / std::max(1, gw - 1)));
                pj = static_cast<int>(std::lround(static_cast<double>(j) * (img.height - 1) / std::max(1, gh - 1)));
            }
            out[mesh.grid_index(i, j)] = img.at(pi, pj);
        }
    }
    return out;
}

GrayscaleImage synthetic_image(const std::string& name, int width, int height) {
    if (width < 2 || height < 2)
        throw ConfigError("synthetic images need at least 2x2 pixels");
    GrayscaleImage img{width, height, std::vector<double>(static_cast<std::size_t>(width) * height, 0.0)};
    for (int j = 0; j < height; ++j) {
        for (int i = 0; i < width; ++i) {
            const double x = static_cast<double>(i) / (width - 1);
            const double y = static_cast<double>(j) / (height - 1);
            double v = 0.0;
            if (name == "disk") {
                v = std::hypot(x - 0.5, y - 0.5) < 0.3 ? 1.0 : 0.0;
            } else if (name == "shapes") {
                // bright disk, mid-gray square on a dark graded background
                v = 0.1 + 0.1 * x;
                if (std::hypot(x - 0.32, y - 0.6) < 0.2)
                    v = 0.9;
                if (std::abs(x - 0.72) < 0.14 && std::abs(y - 0.3) < 0.14)
                    v = 0.7;
            } else if (name == "double_stripe") {
                v = (std::abs(y - 0.35) < 0.08 || std::abs(y - 0.65) < 0.08) ? 1.0 : 0.0;
            } else if (name == "stripe_mask") {
                // 1 = intact, 0 = damaged vertical band
                v = std::abs(x - 0.5) < 0.12 ? 0.0 : 1.0;
            } else {
                throw ConfigError("unknown synthetic image '" + name +
                                  "' (valid: disk, shapes, double_stripe, stripe_mask)");
            }
            img.at(i, j) = v;
        }
    }
    return img;
}

GrayscaleImage load_image(const std::string& source, int width, int height) {
    const std::string prefix = "synthetic:";
    if (source.rfind(prefix, 0) == 0)
        return synthetic_image(source.substr(prefix.size()), width, height);
    return read_pgm(source);
}

std::vector<fs::path> emit_field_snapshot(const NodalField& field, const Mesh& mesh, const fs::path& path,
                                          long step, double time) {
    if (field.size() != mesh.num_nodes())
        throw InputError("snapshot field length does not match the mesh");
    ensure_parent(path);
    std::vector<fs::path> written;
    if (mesh.dim == 1) {
        std::ostringstream os;
        os << "x,value\n";
        char buf[96];
        for (std::size_t k = 0; k < field.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", mesh.nodes[k][0], field[k]);
            os << buf;
        }
        write_text_file(path, os.str());
        written.push_back(path);
        return written;
    }
    const auto [lo_it, hi_it] = std::minmax_element(field.begin(), field.end());
    const double lo = *lo_it, hi = *hi_it;
    GrayscaleImage img{mesh.nx + 1, mesh.ny + 1, {}};
    img.pixels.resize(field.size());
    for (int j = 0; j <= mesh.ny; ++j)
        for (int i = 0; i <= mesh.nx; ++i) {
            const double v = field[mesh.grid_index(i, j)];
            img.at(i, j) = hi > lo ? (v - lo) / (hi - lo) : 128.0 / 255.0;
        }
    write_pgm(img, path);
    written.push_back(path);
    fs::path side = path;
    side += ".txt";
    char buf[256];
    std::snprintf(buf, sizeof buf, "min %.17g\nmax %.17g\nstep %ld\ntime %.17g\n", lo, hi, step, time);
    write_text_file(side, buf);
    written.push_back(side);
    return written;
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

} // namespace

void emit_line_plot(const std::vector<Series>& series, const fs::path& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel) {
    if (series.empty())
        throw InputError("line plot needs at least one series");
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        if (s.x.empty() || s.x.size() != s.y.size())
            throw InputError("line plot series '" + s.name + "' is empty or has unequal lengths");
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k]))
                continue;
            x0 = std::min(x0, s.x[k]);
            x1 = std::max(x1, s.x[k]);
            y0 = std::min(y0, s.y[k]);
            y1 = std::max(y1, s.y[k]);
        }
    }
    if (!std::isfinite(x0) || !std::isfinite(y0))
        throw InputError("line plot has no finite points");
    if (x1 == x0) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if (y1 == y0) {
        y0 -= 0.5;
        y1 += 0.5;
    } else {
        const double pad = 0.05 * (y1 - y0);
        y0 -= pad;
        y1 += pad;
    }

    const double W = 720, H = 440, L = 80, R = 180, T = 40, B = 60;
    const double pw = W - L - R, ph = H - T - B;
    auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * pw; };
    auto sy = [&](double y) { return T + ph - (y - y0) / (y1 - y0) * ph; };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty())
        os << "<text x=\"" << L + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
           << xml_escape(title) << "</text>\n";
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 5; ++k) {
        const double xv = x0 + (x1 - x0) * k / 5.0, yv = y0 + (y1 - y0) * k / 5.0;
        os << "<line x1=\"" << sx(xv) << "\" y1=\"" << T + ph << "\" x2=\"" << sx(xv) << "\" y2=\"" << T + ph + 5
           << "\" stroke=\"black\"/>\n"
           << "<text x=\"" << sx(xv) << "\" y=\"" << T + ph + 18 << "\" text-anchor=\"middle\">" << fmt_tick(xv)
           << "</text>\n"
           << "<line x1=\"" << L - 5 << "\" y1=\"" << sy(yv) << "\" x2=\"" << L << "\" y2=\"" << sy(yv)
           << "\" stroke=\"black\"/>\n"
           << "<text x=\"" << L - 8 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">" << fmt_tick(yv)
           << "</text>\n";
    }
    if (!xlabel.empty())
        os << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">"
           << xml_escape(xlabel) << "</text>\n";
    if (!ylabel.empty())
        os << "<text transform=\"translate(18," << T + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
           << xml_escape(ylabel) << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = colors[s % 6];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < series[s].x.size(); ++k)
            if (std::isfinite(series[s].x[k]) && std::isfinite(series[s].y[k]))
                os << sx(series[s].x[k]) << ',' << sy(series[s].y[k]) << ' ';
        os << "\"/>\n";
        const double ly = T + 10 + 20.0 * static_cast<double>(s);
        os << "<line x1=\"" << L + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << L + pw + 40 << "\" y2=\"" << ly
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
           << "<text x=\"" << L + pw + 46 << "\" y=\"" << ly + 4 << "\">" << xml_escape(series[s].name)
           << "</text>\n";
    }
    os << "</svg>\n";
    write_text_file(path, os.str());
}

void write_text_file(const fs::path& path, const std::string& content) {
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << content;
    if (!out)
        throw IoError("failed writing " + path.string());
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return fnv1a64(os.str());
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace rsav
