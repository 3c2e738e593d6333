/**
 * Payload schemas for the debugger HTTP API.
 *
 * Every rendered value comes from these payloads; the client never
 * recomputes program state. Schemas are validated at the network boundary so
 * a malformed payload is rejected before it can replace a good view.
 */
import { z } from "zod";

export const markSchema = z.union([z.literal("created"), z.literal("changed"), z.null()]);

export const variableRowSchema = z.object({
  name: z.string(),
  type: z.string(),
  value: z.string(),
  kind: z.string(),
  address: z.string().nullable(),
  mark: markSchema,
});

export const fieldRowSchema = z.object({
  name: z.string(),
  type: z.string(),
  value: z.string(),
  address: z.string().nullable(),
  mark: markSchema,
});

export const frameRowSchema = z.object({
  function: z.string(),
  frameIndex: z.number().int().nonnegative(),
  line: z.number().int(),
  collapsed: z.boolean(),
  variables: z.array(variableRowSchema),
});

export const objectRowSchema = z.object({
  name: z.string(),
  id: z.string(),
  type: z.string(),
  fields: z.array(fieldRowSchema),
  mark: markSchema,
});

export const stackSectionSchema = z.object({
  kind: z.literal("stack"),
  collapsed: z.boolean(),
  frames: z.array(frameRowSchema),
});

export const heapSectionSchema = z.object({
  kind: z.literal("heap"),
  collapsed: z.boolean(),
  objects: z.array(objectRowSchema),
});

export const globalsSectionSchema = z.object({
  kind: z.literal("globals"),
  collapsed: z.boolean(),
  variables: z.array(variableRowSchema),
});

export const sectionSchema = z.discriminatedUnion("kind", [
  stackSectionSchema,
  heapSectionSchema,
  globalsSectionSchema,
]);

const pathPair = z.tuple([z.string(), z.string()]);

export const highlightsSchema = z.object({
  changedVariables: z.array(pathPair),
  createdVariables: z.array(pathPair),
  changedObjects: z.array(pathPair),
  createdObjects: z.array(z.string()),
  removedFrames: z.number().int().nonnegative(),
});

export const viewModelSchema = z.object({
  language: z.union([z.literal("java"), z.literal("cpp")]),
  line: z.number().int(),
  error: z.string().nullable(),
  sections: z.array(sectionSchema),
  highlights: highlightsSchema,
  prefs: z.object({
    filterHeap: z.boolean(),
    autoMinimize: z.boolean(),
    collapsedSections: z.array(z.string()),
    collapsedFrames: z.record(z.boolean()),
  }),
});

export const sessionViewSchema = z.object({
  sessionId: z.string(),
  status: z.string(),
  latestStep: z.number().int().nonnegative(),
  step: z.number().int().nonnegative(),
  view: viewModelSchema,
  diff: highlightsSchema,
});

export const sessionInfoSchema = z.object({
  sessionId: z.string(),
  dialect: z.string(),
  status: z.string(),
  breakpoints: z.array(z.number().int()),
  step: z.number().int().nonnegative(),
  latestStep: z.number().int().nonnegative(),
  stepCount: z.number().int().positive(),
  implicitSteps: z.array(z.number().int()),
  error: z.string().nullable(),
  source: z.string(),
});

export type Mark = z.infer<typeof markSchema>;
export type VariableRow = z.infer<typeof variableRowSchema>;
export type FieldRow = z.infer<typeof fieldRowSchema>;
export type FrameRow = z.infer<typeof frameRowSchema>;
export type ObjectRow = z.infer<typeof objectRowSchema>;
export type StackSection = z.infer<typeof stackSectionSchema>;
export type HeapSection = z.infer<typeof heapSectionSchema>;
export type GlobalsSection = z.infer<typeof globalsSectionSchema>;
export type Section = z.infer<typeof sectionSchema>;
export type Highlights = z.infer<typeof highlightsSchema>;
export type ViewModel = z.infer<typeof viewModelSchema>;
export type SessionView = z.infer<typeof sessionViewSchema>;
export type SessionInfo = z.infer<typeof sessionInfoSchema>;

export type LiveAction = "run" | "stepInto" | "stepOver" | "stepReturn";
export type NavAction = "backStep" | "forwardStep" | "jump";
export type Action = LiveAction | NavAction;

export const LIVE_ACTIONS: readonly LiveAction[] = ["run", "stepInto", "stepOver", "stepReturn"];

/** Parse an unknown payload into a SessionView, throwing on shape errors. */
export function parseSessionView(data: unknown): SessionView {
  return sessionViewSchema.parse(data);
}

/** The entity set a view is expected to highlight, as stable strings. */
export function diffEntryKeys(diff: Highlights): Set<string> {
  const keys = new Set<string>();
  for (const [path, name] of diff.createdVariables) keys.add(`var+:${path}:${name}`);
  for (const [path, name] of diff.changedVariables) keys.add(`var~:${path}:${name}`);
  for (const id of diff.createdObjects) keys.add(`obj+:${id}`);
  for (const [id, field] of diff.changedObjects) keys.add(`field~:${id}:${field}`);
  return keys;
}
