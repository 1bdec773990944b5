// vcmr: command-line front end for the moment-retrieval pipeline.
//
// Typical flow:
//   vcmr gen-synthetic --spec spec.json --seed 7 --out-dir corpus/
//   vcmr segment --durations corpus/durations.jsonl --config grid.json --out segments.jsonl
//   vcmr index --segments segments.jsonl --store corpus/segments.emb --out pool.idx
//   vcmr search --queries corpus/queries.emb --index pool.idx -k 10 --out run.jsonl
//   vcmr fuse --run run.jsonl --logits logits.jsonl --out refined.jsonl
//   vcmr ensemble --run-a a.jsonl --run-b b.jsonl --alpha 0.6 --beta 0.4 --out merged.jsonl
//   vcmr grid-search --run-a a.jsonl --run-b b.jsonl --annotations val.jsonl
//   vcmr eval --run run.jsonl --annotations corpus/annotations.jsonl

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "vcmr/ensemble.hpp"
#include "vcmr/errors.hpp"
#include "vcmr/eval.hpp"
#include "vcmr/io.hpp"
#include "vcmr/reader_fusion.hpp"
#include "vcmr/retriever.hpp"
#include "vcmr/segmenter.hpp"
#include "vcmr/synthetic.hpp"

namespace {

vcmr::Normalize normalize_from(const std::string& name) {
    if (name == "none")
        return vcmr::Normalize::none;
    if (name == "minmax_per_query")
        return vcmr::Normalize::minmax_per_query;
    throw vcmr::invalid_input_error("unknown normalize mode '" + name + "'");
}

vcmr::EvalConfig eval_config_from(const std::string& task, double tiou,
                                  const std::vector<std::size_t>& ks) {
    vcmr::EvalConfig cfg;
    if (task == "vr")
        cfg.task = vcmr::Task::VR;
    else if (task == "vcmr")
        cfg.task = vcmr::Task::VCMR;
    else
        throw vcmr::invalid_input_error("unknown task '" + task + "'");
    cfg.tiou_threshold = tiou;
    if (!ks.empty())
        cfg.ks = ks;
    cfg.validate();
    return cfg;
}

void emit_report(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out.is_open())
        throw vcmr::io_error("cannot open '" + out_path + "' for writing");
    out << text;
    if (!out)
        throw vcmr::io_error("failed while writing '" + out_path + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"video corpus moment retrieval pipeline"};
    app.require_subcommand(1);

    // --- segment ---------------------------------------------------------
    std::string seg_durations, seg_config, seg_out;
    CLI::App* segment = app.add_subcommand(
        "segment", "cut videos into a fixed-length/stride segment pool");
    segment->add_option("--durations", seg_durations, "duration manifest (JSONL)")
        ->required();
    segment->add_option("--config", seg_config, "grid config JSON (lengths/strides)")
        ->required();
    segment->add_option("--out", seg_out, "segment manifest to write")->required();
    segment->callback([&] {
        const auto videos = vcmr::io::read_durations(seg_durations);
        const auto cfg = vcmr::io::read_segment_config(seg_config);
        vcmr::io::write_segments(seg_out, vcmr::segment_videos(videos, cfg));
    });

    // --- coverage --------------------------------------------------------
    std::string cov_segments, cov_annotations;
    double cov_tiou = 0.7;
    CLI::App* cover = app.add_subcommand(
        "coverage", "fraction of annotations a segment pool can express");
    cover->add_option("--segments", cov_segments, "segment manifest")->required();
    cover->add_option("--annotations", cov_annotations, "annotations (JSONL)")
        ->required();
    cover->add_option("--tiou", cov_tiou, "overlap threshold (default 0.7)");
    cover->callback([&] {
        const auto segments = vcmr::io::read_segments(cov_segments);
        std::vector<vcmr::MomentPrediction> moments;
        for (const auto& a : vcmr::io::read_annotations(cov_annotations)) {
            if (!a.span)
                throw vcmr::invalid_input_error(
                    "annotation for query '" + a.query_id + "' has no span");
            moments.push_back({a.video_id, *a.span});
        }
        std::cout << vcmr::coverage(segments, moments, cov_tiou) << "\n";
    });

    // --- index -----------------------------------------------------------
    std::string idx_segments, idx_videos, idx_store, idx_out;
    CLI::App* index = app.add_subcommand(
        "index", "build a searchable index from an embedding store");
    CLI::Option* opt_seg =
        index->add_option("--segments", idx_segments, "segment manifest");
    CLI::Option* opt_vid = index->add_option(
        "--videos", idx_videos, "duration manifest (whole-video index)");
    opt_seg->excludes(opt_vid);
    opt_vid->excludes(opt_seg);
    index->add_option("--store", idx_store, "embedding store (.emb or .jsonl)")
        ->required();
    index->add_option("--out", idx_out, "index file to write")->required();
    index->callback([&] {
        if (idx_segments.empty() && idx_videos.empty())
            throw vcmr::invalid_input_error("index needs --segments or --videos");
        const auto store = vcmr::load_store(
            idx_store, vcmr::store_format_for_path(idx_store));
        vcmr::SegmentIndex built =
            idx_segments.empty()
                ? vcmr::build_video_index(vcmr::io::read_durations(idx_videos),
                                          store)
                : vcmr::build_segment_index(vcmr::io::read_segments(idx_segments),
                                            store);
        vcmr::save_index(built, idx_out);
    });

    // --- search ----------------------------------------------------------
    std::string sea_queries, sea_index, sea_out;
    std::size_t sea_k = 10;
    unsigned sea_threads = 0;
    CLI::App* search = app.add_subcommand(
        "search", "exact top-k cosine search of queries against an index");
    search->add_option("--queries", sea_queries, "query embedding store")
        ->required();
    search->add_option("--index", sea_index, "index file")->required();
    search->add_option("-k,--topk", sea_k, "candidates per query (default 10)");
    search->add_option("--threads", sea_threads,
                       "worker threads; 0 = hardware count");
    search->add_option("--out", sea_out, "run file to write")->required();
    search->callback([&] {
        const auto queries = vcmr::load_store(
            sea_queries, vcmr::store_format_for_path(sea_queries));
        const auto loaded = vcmr::load_index(sea_index);
        vcmr::io::write_run(sea_out,
                            vcmr::batch_search(queries, loaded, sea_k, sea_threads));
    });

    // --- fuse ------------------------------------------------------------
    std::string fus_run, fus_logits, fus_config, fus_out;
    CLI::App* fuse = app.add_subcommand(
        "fuse", "refine a run with reader span logits and re-rank");
    fuse->add_option("--run", fus_run, "run file")->required();
    fuse->add_option("--logits", fus_logits, "reader logits (JSONL)")->required();
    fuse->add_option("--config", fus_config,
                     "fusion config JSON (defaults when omitted)");
    fuse->add_option("--out", fus_out, "refined run file to write")->required();
    fuse->callback([&] {
        const vcmr::FusionConfig cfg = fus_config.empty()
                                           ? vcmr::FusionConfig{}
                                           : vcmr::io::read_fusion_config(fus_config);
        const auto run = vcmr::io::read_run(fus_run);
        const auto logits = vcmr::io::read_reader_outputs(fus_logits);
        vcmr::io::write_run(fus_out, vcmr::refine_run(run, logits, cfg));
    });

    // --- ensemble --------------------------------------------------------
    std::string ens_a, ens_b, ens_out, ens_norm = "minmax_per_query";
    double ens_alpha = 0.5, ens_beta = 0.5;
    CLI::App* ensemble = app.add_subcommand(
        "ensemble", "merge two runs with weighted scores and re-rank");
    ensemble->add_option("--run-a", ens_a, "first run file")->required();
    ensemble->add_option("--run-b", ens_b, "second run file")->required();
    ensemble->add_option("--alpha", ens_alpha, "weight of run A (default 0.5)");
    ensemble->add_option("--beta", ens_beta, "weight of run B (default 0.5)");
    ensemble->add_option("--normalize", ens_norm,
                         "none | minmax_per_query (default)");
    ensemble->add_option("--out", ens_out, "merged run file to write")->required();
    ensemble->callback([&] {
        const auto run_a = vcmr::io::read_run(ens_a);
        const auto run_b = vcmr::io::read_run(ens_b);
        vcmr::io::write_run(ens_out,
                            vcmr::merge_rerank(run_a, run_b, {ens_alpha, ens_beta},
                                               normalize_from(ens_norm)));
    });

    // --- grid-search -----------------------------------------------------
    std::string gs_a, gs_b, gs_annotations, gs_grid, gs_out,
        gs_norm = "minmax_per_query", gs_task = "vcmr";
    double gs_tiou = 0.7;
    std::vector<std::size_t> gs_ks;
    std::size_t gs_threads = 1;
    CLI::App* grid = app.add_subcommand(
        "grid-search", "pick ensemble weights by exhaustive validation search");
    grid->add_option("--run-a", gs_a, "first run file")->required();
    grid->add_option("--run-b", gs_b, "second run file")->required();
    grid->add_option("--annotations", gs_annotations, "validation annotations")
        ->required();
    grid->add_option("--grid", gs_grid,
                     "JSON array of [alpha, beta] pairs (default: alpha = "
                     "0.00..1.00 step 0.05, beta = 1 - alpha)");
    grid->add_option("--task", gs_task, "vr | vcmr (default)");
    grid->add_option("--tiou", gs_tiou, "overlap threshold (default 0.7)");
    grid->add_option("--ks", gs_ks, "recall cutoffs (default 1,5,10)")
        ->delimiter(',');
    grid->add_option("--normalize", gs_norm, "none | minmax_per_query (default)");
    grid->add_option("--threads", gs_threads, "grid points scored concurrently");
    grid->add_option("--out", gs_out, "report path (default: stdout)");
    grid->callback([&] {
        const auto run_a = vcmr::io::read_run(gs_a);
        const auto run_b = vcmr::io::read_run(gs_b);
        const auto annotations = vcmr::io::read_annotations(gs_annotations);
        const auto weights = gs_grid.empty() ? vcmr::default_weight_grid()
                                             : vcmr::io::read_weight_grid(gs_grid);
        const auto result = vcmr::grid_search(
            run_a, run_b, annotations, eval_config_from(gs_task, gs_tiou, gs_ks),
            weights, normalize_from(gs_norm), gs_threads);
        emit_report(vcmr::io::grid_search_report_json(result), gs_out);
    });

    // --- eval ------------------------------------------------------------
    std::string ev_run, ev_annotations, ev_out, ev_task = "vcmr";
    double ev_tiou = 0.7;
    std::vector<std::size_t> ev_ks;
    CLI::App* evalcmd =
        app.add_subcommand("eval", "score a run against ground-truth annotations");
    evalcmd->add_option("--run", ev_run, "run file")->required();
    evalcmd->add_option("--annotations", ev_annotations, "annotations (JSONL)")
        ->required();
    evalcmd->add_option("--task", ev_task, "vr | vcmr (default)");
    evalcmd->add_option("--tiou", ev_tiou, "overlap threshold (default 0.7)");
    evalcmd->add_option("--ks", ev_ks, "recall cutoffs (default 1,5,10)")
        ->delimiter(',');
    evalcmd->add_option("--out", ev_out, "report path (default: stdout)");
    evalcmd->callback([&] {
        const auto run = vcmr::io::read_run(ev_run);
        const auto annotations = vcmr::io::read_annotations(ev_annotations);
        const auto report = vcmr::evaluate(
            run, annotations, eval_config_from(ev_task, ev_tiou, ev_ks));
        emit_report(vcmr::io::eval_report_json(report), ev_out);
    });

    // --- gen-synthetic ---------------------------------------------------
    std::string gen_spec, gen_dir;
    std::uint64_t gen_seed = 0;
    CLI::App* gen = app.add_subcommand(
        "gen-synthetic", "generate a corpus with planted ground truth");
    gen->add_option("--spec", gen_spec, "synthetic spec JSON")->required();
    gen->add_option("--seed", gen_seed, "64-bit seed; sole source of randomness")
        ->required();
    gen->add_option("--out-dir", gen_dir, "corpus directory to write")->required();
    gen->callback([&] {
        const auto spec = vcmr::io::read_synthetic_spec(gen_spec);
        vcmr::write_corpus(vcmr::generate_synthetic(spec, gen_seed), gen_dir);
    });

    try {
        CLI11_PARSE(app, argc, argv);
    } catch (const vcmr::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
