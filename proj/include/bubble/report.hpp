#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "bubble/config.hpp"
#include "bubble/driver.hpp"

namespace bubble {

inline constexpr int kReportSchema = 1;

/// tree.json body: sorted keys, two-space indent, trailing newline.
std::string tree_json(const BubbleTree& tree, const RunConfig& config);

/// Header `iteration,component,k_index,q_re,q_im,r_re,r_im,t,outside_mass,
/// center_moment_re,center_moment_im,balanced_moment_re,balanced_moment_im,
/// total_mass,scale_ratio,multiple_zeros`.
void write_markings_csv(std::ostream& out, const std::vector<MarkingRecord>& markings);

/// Writes tree.json, markings.csv and theta_profile.csv into dir (created if needed).
void write_extract_outputs(const std::string& dir, const BubbleTree& tree, const RunConfig& config);

/// Neck-only report for nodal families: neck.json and theta_profile.csv.
void write_neck_outputs(const std::string& dir, const GeneratedFamily& family,
                        const RunConfig& config);

}  // namespace bubble
