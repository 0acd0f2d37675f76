// Copyright 2026 The tesse-lite Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tesse/session.hpp"

namespace tesse {

/// What a policy runner needs from a simulator, in process or over the wire.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual ResetInfo reset(const SessionConfig& config) = 0;
  virtual StepReceipt act(Action action) = 0;
  virtual Observation observe(const std::vector<Modality>& modalities) = 0;
  /// Simulator-reported result of the current episode.
  virtual EpisodeResult result() = 0;
  /// Wire frames of the last observation, as GET_OBS would return them.
  virtual std::vector<Message> last_observation_frames() const = 0;
};

class LocalEnvironment : public Environment {
 public:
  explicit LocalEnvironment(std::shared_ptr<SceneStore> store = nullptr,
                            std::uint64_t session_id = 1,
                            OdometrySink* sink = nullptr);

  ResetInfo reset(const SessionConfig& config) override;
  StepReceipt act(Action action) override;
  Observation observe(const std::vector<Modality>& modalities) override;
  EpisodeResult result() override;
  std::vector<Message> last_observation_frames() const override;

  Session& session() { return session_; }

 private:
  Session session_;
  std::vector<Message> last_frames_;
};

}  // namespace tesse
