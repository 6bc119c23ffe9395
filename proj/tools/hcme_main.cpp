// hcme command line: encrypt / decrypt / volume / analyze / chart / captcha.
//
// Exit codes: 0 success, 1 usage error, 2 I/O or format error,
// 3 authentication rejected, 4 divergence or numeric error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "hcme/hcme.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFormat = 2;
constexpr int kExitAuth = 3;
constexpr int kExitNumeric = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw hcme::Error("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

// Write to a temp file in the same directory, then rename; a failed run never
// leaves a partial output behind.
void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
    fs::path dir = path.parent_path();
    fs::path tmp = (dir.empty() ? fs::path(".") : dir) /
                   (path.filename().string() + ".tmp" + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw hcme::Error("cannot create " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw hcme::Error("short write to " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw hcme::Error("cannot move output into place: " + ec.message());
    }
}

void write_text_atomic(const fs::path& path, const std::string& text) {
    write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

hcme::MasterKey key_from_option(const std::string& hex) {
    if (hex.empty())
        throw UsageError("a master key is required (--key or HCME_KEY, 64 hex characters)");
    return hcme::MasterKey::from_hex(hex);
}

hcme::Salt make_salt(const std::string& hex) {
    if (!hex.empty()) return hcme::Salt::from_hex(hex);
    std::random_device rd;
    hcme::Salt salt;
    for (auto& b : salt.bytes) b = static_cast<std::uint8_t>(rd());
    return salt;
}

bool looks_like_pgm(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5';
}

hcme::Volume load_input_volume(const fs::path& path) {
    auto bytes = read_file(path);
    if (looks_like_pgm(bytes)) return hcme::volume_from_image(hcme::read_pgm(bytes));
    return hcme::volume_from_dicom(hcme::parse_dicom(bytes));
}

hcme::ByteImage load_input_image(const fs::path& path) {
    auto bytes = read_file(path);
    if (looks_like_pgm(bytes)) return hcme::read_pgm(bytes);
    hcme::Volume vol = hcme::volume_from_dicom(hcme::parse_dicom(bytes));
    return vol.slices.at(0);
}

std::pair<double, double> parse_range(const std::string& text) {
    auto sep = text.find(':');
    if (sep == std::string::npos) throw UsageError("range must be lo:hi");
    try {
        return {std::stod(text.substr(0, sep)), std::stod(text.substr(sep + 1))};
    } catch (...) {
        throw UsageError("range must be lo:hi with numeric bounds");
    }
}

hcme::RoiBox parse_roi(const std::string& text) {
    std::array<std::uint32_t, 6> v{};
    std::stringstream ss(text);
    std::string tok;
    std::size_t i = 0;
    while (std::getline(ss, tok, ',')) {
        if (i >= 6) throw UsageError("ROI must be z0,z1,y0,y1,x0,x1");
        try {
            v[i++] = static_cast<std::uint32_t>(std::stoul(tok));
        } catch (...) {
            throw UsageError("ROI coordinates must be non-negative integers");
        }
    }
    if (i != 6) throw UsageError("ROI must be z0,z1,y0,y1,x0,x1");
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

// Prompt on stderr, echoing input; the preview image is the thing the human
// actually reads the answer from.
hcme::CaptchaProvider interactive_captcha(const fs::path& preview_path) {
    return [preview_path](const hcme::CaptchaChallenge& ch, int attempt) {
        if (attempt == 1) {
            write_file_atomic(preview_path, hcme::captcha_preview_ppm(ch));
            std::cerr << "captcha challenge written to " << preview_path.string() << "\n";
        }
        std::cerr << "enter captcha (attempt " << attempt << "): " << std::flush;
        std::string line;
        if (!std::getline(std::cin, line)) return std::string{};
        return line;
    };
}

hcme::CaptchaProvider captcha_provider(const std::string& answer_flag, const fs::path& preview) {
    if (!answer_flag.empty())
        return [answer_flag](const hcme::CaptchaChallenge&, int) { return answer_flag; };
    return interactive_captcha(preview);
}

// A minimal viewable DICOM shell around the encrypted first plane.
std::vector<std::uint8_t> dicom_shell(const hcme::Envelope& env) {
    using namespace hcme;
    DicomObject obj;
    obj.has_preamble = true;
    obj.explicit_vr = true;
    auto add = [&](std::uint16_t g, std::uint16_t e, const char* vr, std::string value) {
        if (value.size() % 2) value.push_back(vr[0] == 'U' && vr[1] == 'I' ? '\0' : ' ');
        DicomElement el;
        el.tag = {g, e};
        el.vr = {vr[0], vr[1]};
        el.value.assign(value.begin(), value.end());
        obj.elements.push_back(std::move(el));
    };
    auto add_us = [&](std::uint16_t g, std::uint16_t e, std::uint16_t v) {
        DicomElement el;
        el.tag = {g, e};
        el.vr = {'U', 'S'};
        detail::put_le<std::uint16_t>(el.value, v);
        obj.elements.push_back(std::move(el));
    };
    add(0x0002, 0x0010, "UI", std::string(kSyntaxExplicitLE));
    add(0x0008, 0x0060, "CS", "OT");
    add_us(0x0028, 0x0010, static_cast<std::uint16_t>(env.padded_dim));
    add_us(0x0028, 0x0011, static_cast<std::uint16_t>(env.padded_dim));
    add_us(0x0028, 0x0100, 8);
    DicomElement pixel;
    pixel.tag = kTagPixelData;
    pixel.vr = {'O', 'B'};
    std::size_t plane = static_cast<std::size_t>(env.padded_dim) * env.padded_dim;
    pixel.value.assign(env.payload.begin(),
                       env.payload.begin() + static_cast<std::ptrdiff_t>(plane));
    obj.pixel_index = obj.elements.size();
    obj.elements.push_back(std::move(pixel));
    obj.rows = obj.cols = env.padded_dim;
    obj.bits_allocated = 8;
    obj.frames = 1;
    return write_dicom(obj);
}

struct CommonKeyOpts {
    std::string key_hex;
    std::string salt_hex;
};

void add_key_options(CLI::App* cmd, CommonKeyOpts& opts, bool with_salt) {
    cmd->add_option("--key", opts.key_hex, "master key, 64 hex characters")
        ->envname("HCME_KEY");
    if (with_salt)
        cmd->add_option("--salt", opts.salt_hex,
                        "salt, 32 hex characters (default: from OS randomness)");
}

int run_encrypt(const fs::path& in, const fs::path& out, const CommonKeyOpts& keys,
                bool no_captcha, int jobs, const std::string& shell_path) {
    hcme::MasterKey key = key_from_option(keys.key_hex);
    hcme::Salt salt = make_salt(keys.salt_hex);
    hcme::Volume vol = load_input_volume(in);
    hcme::EncryptOptions opts;
    opts.captcha = !no_captcha;
    opts.jobs = jobs;
    hcme::Envelope env = hcme::encrypt_volume_whole(vol, key, salt, opts);
    write_file_atomic(out, hcme::write_envelope(env));
    if (!shell_path.empty()) write_file_atomic(shell_path, dicom_shell(env));
    return kExitOk;
}

int run_decrypt(const fs::path& in, const fs::path& out, const CommonKeyOpts& keys,
                const std::string& answer) {
    hcme::MasterKey key = key_from_option(keys.key_hex);
    hcme::Envelope env = hcme::read_envelope(read_file(in));
    fs::path preview = out;
    preview += ".captcha.ppm";
    hcme::Volume vol = hcme::decrypt_volume(env, key, captcha_provider(answer, preview));
    if (vol.sources.size() > 1)
        throw UsageError("envelope holds a multi-file series; use `volume decrypt`");
    if (vol.sources.size() == 1) {
        write_file_atomic(out, hcme::write_dicom(vol.sources[0]));
    } else {
        if (vol.slices.size() != 1)
            throw UsageError("envelope holds several raw slices; use `volume decrypt`");
        write_file_atomic(out, hcme::write_pgm(vol.slices[0]));
    }
    return kExitOk;
}

int run_volume_encrypt(const fs::path& dir, const fs::path& out, const CommonKeyOpts& keys,
                       const std::string& roi_text, bool no_captcha, int jobs) {
    hcme::MasterKey key = key_from_option(keys.key_hex);
    hcme::Salt salt = make_salt(keys.salt_hex);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".dcm")
            files.push_back(entry.path());
    if (files.empty()) throw hcme::Error("no .dcm files in " + dir.string());
    std::sort(files.begin(), files.end());
    std::vector<hcme::DicomObject> objects;
    objects.reserve(files.size());
    for (const auto& f : files) objects.push_back(hcme::parse_dicom(read_file(f)));
    hcme::Volume vol = hcme::load_series(std::move(objects));
    if (!vol.spacing_from_tags)
        std::cerr << "warning: spacing tags missing, using (1,1,1) mm\n";
    hcme::EncryptOptions opts;
    opts.captcha = !no_captcha;
    opts.jobs = jobs;
    hcme::Envelope env;
    if (!roi_text.empty())
        env = hcme::encrypt_volume_partial(vol, parse_roi(roi_text), key, salt, opts);
    else
        env = hcme::encrypt_volume_whole(vol, key, salt, opts);
    write_file_atomic(out, hcme::write_envelope(env));
    return kExitOk;
}

int run_volume_decrypt(const fs::path& in, const fs::path& out_dir, const CommonKeyOpts& keys,
                       const std::string& answer) {
    hcme::MasterKey key = key_from_option(keys.key_hex);
    hcme::Envelope env = hcme::read_envelope(read_file(in));
    fs::create_directories(out_dir);
    hcme::Volume vol =
        hcme::decrypt_volume(env, key, captcha_provider(answer, out_dir / "captcha.ppm"));
    char name[32];
    if (vol.sources.size() == vol.slices.size() && !vol.sources.empty()) {
        for (std::size_t i = 0; i < vol.sources.size(); ++i) {
            std::snprintf(name, sizeof name, "slice_%04zu.dcm", i);
            write_file_atomic(out_dir / name, hcme::write_dicom(vol.sources[i]));
        }
    } else if (vol.sources.size() == 1) {
        write_file_atomic(out_dir / "volume.dcm", hcme::write_dicom(vol.sources[0]));
    } else {
        for (std::size_t i = 0; i < vol.slices.size(); ++i) {
            std::snprintf(name, sizeof name, "slice_%04zu.pgm", i);
            write_file_atomic(out_dir / name, hcme::write_pgm(vol.slices[i]));
        }
    }
    return kExitOk;
}

int run_analyze(const fs::path& a_path, const std::string& b_path, const fs::path& report_path,
                const std::string& csv_path, const std::string& hist_path, std::size_t samples,
                std::uint64_t rng_seed) {
    hcme::ByteImage a = load_input_image(a_path);
    std::optional<hcme::ByteImage> b;
    if (!b_path.empty()) b = load_input_image(b_path);
    hcme::AnalysisReport rep = hcme::analyze(a, b ? &*b : nullptr, samples, rng_seed,
                                             a_path.filename().string(),
                                             b ? fs::path(b_path).filename().string() : "b");
    write_text_atomic(report_path, hcme::report_json(rep));
    if (!csv_path.empty()) write_text_atomic(csv_path, hcme::report_csv(rep));
    if (!hist_path.empty())
        write_file_atomic(hist_path, hcme::write_pgm(hcme::histogram_image(rep.a.histogram)));
    return kExitOk;
}

struct ChartOpts {
    std::string mode;
    std::string out;
    std::string axis = "b2";
    std::string range = "0:1.3";
    std::string a1_range = "-0.3:0.4";
    std::string b2_range = "0:1.3";
    std::string grid = "131x71";
    std::size_t samples = 261;
    std::size_t keep = 200;
    std::size_t iters = 20000;
    std::size_t transient = hcme::kDefaultTransient;
    double zero_tol = hcme::kDefaultZeroTolerance;
    int jobs = 0;
};

int run_chart(const ChartOpts& o) {
    fs::path out(o.out);
    bool csv = out.extension() == ".csv";
    std::ostringstream body;
    if (o.mode == "bifurcation") {
        auto [lo, hi] = parse_range(o.range);
        auto sweep = hcme::bifurcation_sweep(hcme::sweep_axis_from_name(o.axis), lo, hi, o.samples,
                                             o.keep, hcme::MapParams::canonical(), hcme::kChartSeed,
                                             o.transient, o.jobs);
        hcme::write_sweep_csv(body, hcme::sweep_axis_from_name(o.axis), sweep);
    } else if (o.mode == "lyapunov") {
        auto [a1_lo, a1_hi] = parse_range(o.a1_range);
        auto [b2_lo, b2_hi] = parse_range(o.b2_range);
        auto x = o.grid.find('x');
        if (x == std::string::npos) throw UsageError("grid must be ROWSxCOLS");
        std::size_t rows = std::stoul(o.grid.substr(0, x));
        std::size_t cols = std::stoul(o.grid.substr(x + 1));
        auto chart = hcme::lyapunov_chart(a1_lo, a1_hi, b2_lo, b2_hi, rows, cols, o.iters,
                                          hcme::MapParams::canonical(), o.zero_tol,
                                          hcme::kChartSeed, o.transient, o.jobs);
        if (csv)
            hcme::write_chart_csv(body, chart);
        else
            hcme::write_chart_pgm(body, chart);
    } else {
        throw UsageError("chart --mode must be bifurcation or lyapunov");
    }
    write_text_atomic(out, body.str());
    return kExitOk;
}

int run_captcha_preview(const CommonKeyOpts& keys, const fs::path& out, std::size_t dim) {
    hcme::MasterKey key = key_from_option(keys.key_hex);
    if (keys.salt_hex.empty()) throw UsageError("captcha preview needs --salt");
    hcme::Salt salt = hcme::Salt::from_hex(keys.salt_hex);
    hcme::KeySet ks = hcme::derive_keyset(key, salt);
    hcme::CaptchaChallenge ch = hcme::generate_captcha(ks.captcha_seed, dim);
    write_file_atomic(out, hcme::captcha_preview_ppm(ch));
    return kExitOk;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"hyperchaotic medical image encryption toolkit"};
    app.require_subcommand(1);

    // encrypt
    auto* enc = app.add_subcommand("encrypt", "encrypt a DICOM or PGM image");
    std::string enc_in, enc_out, enc_shell;
    CommonKeyOpts enc_keys;
    bool enc_no_captcha = false;
    int enc_jobs = 0;
    enc->add_option("--in", enc_in, "input .dcm or .pgm")->required();
    enc->add_option("--out", enc_out, "output envelope (.hcme)")->required();
    add_key_options(enc, enc_keys, true);
    enc->add_flag("--no-captcha", enc_no_captcha, "skip the captcha layer");
    enc->add_option("--jobs", enc_jobs, "worker threads (default: logical CPUs)");
    enc->add_option("--dicom-shell", enc_shell,
                    "also write the encrypted plane wrapped as a viewable DICOM");

    // decrypt
    auto* dec = app.add_subcommand("decrypt", "decrypt an envelope");
    std::string dec_in, dec_out, dec_answer;
    CommonKeyOpts dec_keys;
    dec->add_option("--in", dec_in, "input envelope (.hcme)")->required();
    dec->add_option("--out", dec_out, "output .dcm or .pgm")->required();
    add_key_options(dec, dec_keys, false);
    dec->add_option("--captcha-answer", dec_answer,
                    "captcha answer for non-interactive use (insecure: visible in the "
                    "process list; meant for automated tests)");

    // volume
    auto* vol = app.add_subcommand("volume", "3D series modes");
    vol->require_subcommand(1);
    auto* venc = vol->add_subcommand("encrypt", "encrypt a directory of .dcm slices");
    std::string venc_dir, venc_out, venc_roi;
    CommonKeyOpts venc_keys;
    bool venc_no_captcha = false;
    int venc_jobs = 0;
    venc->add_option("--dir", venc_dir, "directory of .dcm files")->required();
    venc->add_option("--out", venc_out, "output envelope")->required();
    add_key_options(venc, venc_keys, true);
    venc->add_option("--roi", venc_roi, "partial mode box: z0,z1,y0,y1,x0,x1");
    venc->add_flag("--no-captcha", venc_no_captcha, "skip the captcha layer");
    venc->add_option("--jobs", venc_jobs, "worker threads (default: logical CPUs)");

    auto* vdec = vol->add_subcommand("decrypt", "decrypt an envelope into slice files");
    std::string vdec_in, vdec_outdir, vdec_answer;
    CommonKeyOpts vdec_keys;
    vdec->add_option("--in", vdec_in, "input envelope")->required();
    vdec->add_option("--out-dir", vdec_outdir, "output directory")->required();
    add_key_options(vdec, vdec_keys, false);
    vdec->add_option("--captcha-answer", vdec_answer,
                     "captcha answer for non-interactive use (insecure: meant for tests)");

    // analyze
    auto* ana = app.add_subcommand("analyze", "security metrics report");
    std::string ana_a, ana_b, ana_report, ana_csv, ana_hist;
    std::size_t ana_samples = hcme::kDefaultCorrelationSamples;
    std::uint64_t ana_seed = hcme::kDefaultCorrelationSeed;
    ana->add_option("--a", ana_a, "first image (.pgm or .dcm)")->required();
    ana->add_option("--b", ana_b, "second image for comparison metrics");
    ana->add_option("--report", ana_report, "output JSON report")->required();
    ana->add_option("--csv", ana_csv, "also write a CSV summary");
    ana->add_option("--hist-pgm", ana_hist, "write the histogram bar chart of --a as PGM");
    ana->add_option("--samples", ana_samples, "correlation sample pairs (default 5000)");
    ana->add_option("--rng-seed", ana_seed, "correlation sampling seed");

    // chart
    auto* cht = app.add_subcommand("chart", "bifurcation sweep or a1-b2 class chart");
    ChartOpts cht_opts;
    cht->add_option("--mode", cht_opts.mode, "bifurcation or lyapunov")->required();
    cht->add_option("--out", cht_opts.out, "output .csv or .pgm")->required();
    cht->add_option("--axis", cht_opts.axis, "swept parameter (default b2)");
    cht->add_option("--range", cht_opts.range, "sweep range lo:hi (default 0:1.3)");
    cht->add_option("--a1-range", cht_opts.a1_range, "chart a1 range (default -0.3:0.4)");
    cht->add_option("--b2-range", cht_opts.b2_range, "chart b2 range (default 0:1.3)");
    cht->add_option("--grid", cht_opts.grid, "chart grid ROWSxCOLS (default 131x71)");
    cht->add_option("--samples", cht_opts.samples, "sweep sample count (default 261)");
    cht->add_option("--keep", cht_opts.keep, "post-transient values kept per sample");
    cht->add_option("--iters", cht_opts.iters, "iterations per Lyapunov estimate");
    cht->add_option("--transient", cht_opts.transient, "discarded leading iterations");
    cht->add_option("--zero-tol", cht_opts.zero_tol, "zero tolerance on exponents");
    cht->add_option("--jobs", cht_opts.jobs, "worker threads");

    // captcha preview
    auto* cap = app.add_subcommand("captcha", "captcha utilities");
    cap->require_subcommand(1);
    auto* prev = cap->add_subcommand("preview", "render the challenge for a key/salt pair");
    CommonKeyOpts prev_keys;
    std::string prev_out;
    std::size_t prev_dim = 256;
    add_key_options(prev, prev_keys, true);
    prev->add_option("--out", prev_out, "output .ppm")->required();
    prev->add_option("--dim", prev_dim, "plane dimension (default 256)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (enc->parsed())
        return run_encrypt(enc_in, enc_out, enc_keys, enc_no_captcha, enc_jobs, enc_shell);
    if (dec->parsed()) return run_decrypt(dec_in, dec_out, dec_keys, dec_answer);
    if (vol->parsed() && venc->parsed())
        return run_volume_encrypt(venc_dir, venc_out, venc_keys, venc_roi, venc_no_captcha,
                                  venc_jobs);
    if (vol->parsed() && vdec->parsed())
        return run_volume_decrypt(vdec_in, vdec_outdir, vdec_keys, vdec_answer);
    if (ana->parsed())
        return run_analyze(ana_a, ana_b, ana_report, ana_csv, ana_hist, ana_samples, ana_seed);
    if (cht->parsed()) return run_chart(cht_opts);
    if (cap->parsed() && prev->parsed()) return run_captcha_preview(prev_keys, prev_out, prev_dim);
    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const hcme::CaptchaRejected& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitAuth;
    } catch (const hcme::ChaoticDivergence& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const hcme::InvalidKeyLength& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const hcme::InvalidSaltLength& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFormat;
    }
}
