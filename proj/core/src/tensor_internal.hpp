// Copyright 2026 The LWC Authors
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

#include <functional>
#include <initializer_list>
#include <vector>

#include "lwc/tensor.hpp"

namespace lwc {

namespace detail {

template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> value, std::initializer_list<const Tensor<T>*> inputs,
                      std::function<void(const Node<T>&)> fn) {
  auto node = std::make_shared<Node<T>>();
  node->shape = shape;
  node->value = std::move(value);
  if (grad_enabled()) {
    for (const Tensor<T>* in : inputs) {
      if (in->defined() && in->requires_grad()) node->requires_grad = true;
    }
    if (node->requires_grad) {
      for (const Tensor<T>* in : inputs) {
        if (in->defined()) node->parents.push_back(in->node());
      }
      node->backward = std::move(fn);
    }
  }
  return Tensor<T>::from_node(std::move(node));
}

template <typename T>
Tensor<T> make_result_n(Shape shape, std::vector<T> value, const std::vector<Tensor<T>>& inputs,
                        std::function<void(const Node<T>&)> fn) {
  auto node = std::make_shared<Node<T>>();
  node->shape = shape;
  node->value = std::move(value);
  if (grad_enabled()) {
    for (const auto& in : inputs) {
      if (in.requires_grad()) node->requires_grad = true;
    }
    if (node->requires_grad) {
      for (const auto& in : inputs) node->parents.push_back(in.node());
      node->backward = std::move(fn);
    }
  }
  return Tensor<T>::from_node(std::move(node));
}

}  // namespace detail

}  // namespace lwc
