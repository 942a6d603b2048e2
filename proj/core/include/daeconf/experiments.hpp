// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "daeconf/config.hpp"

namespace daeconf {

/// Library version string.
const char* version();

struct RunResult {
  std::filesystem::path out_dir;
  std::vector<std::string> files;  // relative to out_dir, sorted, manifest excluded
  std::vector<std::string> summary;
  double wall_seconds = 0.0;
  int exit_code = 0;  // non-zero when a check inside the run failed
};

/// config.out_dir, else $DAECONF_OUT_DIR/<task>, else runs/<task>.
std::filesystem::path resolve_out_dir(const ExperimentConfig& config);

/// Validates `config`, runs the task and writes its artifacts plus
/// manifest.json. Progress goes to `log` when non-null. CSV outputs depend only
/// on the config (workers included only as a scheduling hint).
///
/// CSV column orders:
///   rings_summary.csv   variant,steps,final_loss,mean_conf_ring,mean_conf_background,ratio,label_accuracy
///   loss_<v>.csv        step,loss
///   field_<v>.csv       row,col,x,y,score_no_gate,gate,score,label
///   train_summary.csv   variant,train_samples,epochs,steps,final_loss,train_accuracy,test_accuracy
///   eval.csv            threshold,accuracy,thresholded_accuracy
///   fooling_attempts.csv  variant,class,trial,success,steps,final_output
///   fooling_summary.csv   variant,target,threshold,eta,trials_per_class,attempts,successes,rate,mean_steps,
///                         test_accuracy,thresholded_accuracy
///   openset.csv         variant,num_known,openness,repetition,known_classes,tp,fp,fn,tn,precision,recall,f
///   openset_summary.csv variant,num_known,openness,mean_f,std_f
///   oneclass.csv        variant,class,auc
///   roc.csv             variant,class,fpr,tpr
///   roc_average.csv     variant,fpr,tpr
///   gradcheck.csv       check,instances,max_rel_error,passed
RunResult run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

}  // namespace daeconf
