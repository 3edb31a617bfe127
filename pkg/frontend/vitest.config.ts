import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // the end-to-end suite boots real engine processes
    testTimeout: 30_000,
    hookTimeout: 30_000,
  },
});
