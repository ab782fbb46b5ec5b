// Copyright (c) 2026 rotordiag contributors.
// SPDX-License-Identifier: Apache-2.0

int main() { return 0; }
