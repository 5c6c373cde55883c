// SPDX-License-Identifier: Apache-2.0
//
// mfa-chest: low-rank mixture models for MMSE channel estimation
// Copyright (C) 2026 The mfa-chest Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "mfa/dataset.hpp"
#include "mfa/gmm.hpp"
#include "mfa/model.hpp"
#include "mfa/scenario.hpp"

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mfa
{

enum class EstimatorKind
{
    Ls,
    SampleLmmse,
    GenieOmp,
    GmmFull,
    GmmToeplitz,
    GmmCirculant,
    Mfa,
    MfaFile, // pre-trained MFA model (file or in-memory)
    GmmFile, // pre-trained GMM model (file or in-memory)
};

// "ls", "lmmse", "genie-omp", "gmm-full", "gmm-toep", "gmm-circ", "mfa", "mfa-file", "gmm-file".
std::string_view to_string(EstimatorKind kind);
EstimatorKind parse_estimator_kind(std::string_view name);

struct EstimatorSpec
{
    std::string id; // defaults to the kind name
    EstimatorKind kind = EstimatorKind::Ls;
    Index K = 1;
    Index L = 1;
    int s_max = 0;            // genie-omp depth, 0 for N
    int Nv = 0, Nh = 0;       // genie-omp dictionary axes; 0 takes the scenario's (or 1 x N)
    int oversampling = 2;     // genie-omp, both axes
    std::filesystem::path model_path;
    std::shared_ptr<const MfaModel> mfa_model;
    std::shared_ptr<const GmmModel> gmm_model;
};

struct BenchSpec
{
    // Either a scenario or a pair of dataset files.
    std::optional<ScenarioConfig> scenario;
    std::filesystem::path train_path;
    std::filesystem::path eval_path;
    Index train_count = 10000;
    Index eval_count = 10000; // held out, disjoint from training

    std::vector<EstimatorSpec> estimators;
    std::vector<double> snr_grid_db{0.0, 10.0, 20.0};
    std::uint64_t seed = 0;
    FitConfig fit;
    int jobs = 1;
    bool timing = true; // false writes wall_time_ms = 0 for byte-stable reports

    void validate() const;
};

ScenarioConfig parse_scenario_config(std::string_view json_text);
BenchSpec parse_bench_spec(std::string_view json_text);
// Reads a JSON file; relative dataset/model paths resolve against its directory.
BenchSpec load_bench_spec(const std::filesystem::path &path);

struct BenchData
{
    ChannelDataset train;
    ChannelDataset eval;
    int Nv = 1, Nh = 0;
};

// Loads or generates the train/eval sets and every referenced model file.
BenchData load_bench_data(const BenchSpec &spec);

// Eval observations at grid point snr_index; the noise stream depends only on
// (seed, snr_index), never on training.
ComplexMat eval_observations(const ChannelDataset &eval, std::uint64_t seed, std::size_t snr_index,
                             double snr_db);

struct ReportRow
{
    std::string estimator;
    Index K = 0;
    Index L = 0;
    Index T = 0;
    double snr_db = 0.0;
    double nmse = 0.0;
    double wall_time_ms = 0.0; // estimating the whole eval set, filter construction included
};

// (1 / (T N)) sum_t ||h_hat_t - h_t||^2.
double nmse(const ComplexMat &estimates, const ComplexMat &truth);

std::vector<ReportRow> run_snr_sweep(const BenchSpec &spec);
std::vector<ReportRow> run_snr_sweep(const BenchSpec &spec, const BenchData &data);

// MFA estimators are refit once per L; other estimators run once with L = 0.
std::vector<ReportRow> run_latent_sweep(const BenchSpec &spec, const std::vector<Index> &L_grid, double snr_db);
std::vector<ReportRow> run_latent_sweep(const BenchSpec &spec, const BenchData &data,
                                        const std::vector<Index> &L_grid, double snr_db);

// MFA estimators over K_grid x L_grid, trained GMMs over K_grid, the rest once.
std::vector<ReportRow> run_grid_sweep(const BenchSpec &spec, const std::vector<Index> &K_grid,
                                      const std::vector<Index> &L_grid, double snr_db);
std::vector<ReportRow> run_grid_sweep(const BenchSpec &spec, const BenchData &data, const std::vector<Index> &K_grid,
                                      const std::vector<Index> &L_grid, double snr_db);

enum class ReportFormat
{
    Csv,
    JsonLines,
};

// CSV header estimator,K,L,T,snr_db,nmse,wall_time_ms is always written.
void write_report(std::ostream &out, const std::vector<ReportRow> &rows, ReportFormat format);
std::string csv_quote(std::string_view field);

} // namespace mfa
