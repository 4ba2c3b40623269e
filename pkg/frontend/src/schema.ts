/**
 * Types for the export document (schema version 1) and the validation
 * run on every load. Mirrors docs/schema.md in the pipeline repository;
 * this app consumes exactly that format and nothing else.
 */

export const SCHEMA_VERSION = 1;

export interface ExportNode {
  id: string;
  kind: 'original' | 'retweet';
  user: string | null;
  followers: number;
  timestamp: number;
  label: number | null;
  probability: number | null;
  community: number | null;
  out_degree: number;
  size_out_degree: number;
  size_followers: number;
  unobserved: boolean;
}

export interface ExportLink {
  source: string;
  target: string;
  time_weight: number;
}

export interface HashtagNode {
  id: string;
  count: number;
}

export interface HashtagLink {
  source: string;
  target: string;
  weight: number;
}

export interface TrendSeries {
  bucket_seconds: number;
  threshold: number;
  start: number | null;
  fake: number[];
  real: number[];
  cumulative_fake: number[];
  cumulative_real: number[];
  viral_at: number | null;
  per_hashtag?: Record<string, TrendSeries>;
}

export interface ExportSummary {
  node_count: number;
  link_count: number;
  distinct_users: number;
  first_timestamp: number | null;
  last_timestamp: number | null;
  original_count: number;
  retweet_count: number;
  unobserved_originals: number;
  rejected_clock_skew: number;
}

export interface ExportDocument {
  schema_version: number;
  summary: ExportSummary;
  nodes: ExportNode[];
  links: ExportLink[];
  hashtag_nodes: HashtagNode[];
  hashtag_links: HashtagLink[];
  trend: TrendSeries;
  meta: Record<string, unknown>;
}

export class SchemaError extends Error {}

const TOP_KEYS = ['schema_version', 'summary', 'nodes', 'links',
  'hashtag_nodes', 'hashtag_links', 'trend', 'meta'] as const;

const NODE_KEYS = ['id', 'kind', 'user', 'followers', 'timestamp', 'label',
  'probability', 'community', 'out_degree', 'size_out_degree',
  'size_followers', 'unobserved'] as const;

/**
 * Validate a parsed JSON value against the version-1 schema and return it
 * typed. Throws SchemaError with a message suitable for showing to the
 * user; a wrong schema_version reports the version that was found.
 */
export function validateDocument(raw: unknown): ExportDocument {
  if (typeof raw !== 'object' || raw === null || Array.isArray(raw)) {
    throw new SchemaError('export document must be a JSON object');
  }
  const doc = raw as Record<string, unknown>;
  if (doc.schema_version !== SCHEMA_VERSION) {
    throw new SchemaError(
      `unsupported schema_version ${JSON.stringify(doc.schema_version)}; ` +
      `this explorer reads version ${SCHEMA_VERSION}`,
    );
  }
  for (const key of TOP_KEYS) {
    if (!(key in doc)) throw new SchemaError(`export document missing key "${key}"`);
  }
  if (!Array.isArray(doc.nodes) || !Array.isArray(doc.links)
      || !Array.isArray(doc.hashtag_nodes) || !Array.isArray(doc.hashtag_links)) {
    throw new SchemaError('nodes, links, hashtag_nodes, hashtag_links must be arrays');
  }
  const ids = new Set<string>();
  for (const node of doc.nodes as Record<string, unknown>[]) {
    for (const key of NODE_KEYS) {
      if (!(key in node)) throw new SchemaError(`node entry missing field "${key}"`);
    }
    const id = node.id as string;
    if (ids.has(id)) throw new SchemaError(`duplicate node id "${id}"`);
    ids.add(id);
  }
  for (const link of doc.links as Record<string, unknown>[]) {
    for (const key of ['source', 'target', 'time_weight']) {
      if (!(key in link)) throw new SchemaError(`link entry missing field "${key}"`);
    }
    if (!ids.has(link.source as string) || !ids.has(link.target as string)) {
      throw new SchemaError(
        `link ${link.source}->${link.target} references a missing node`);
    }
  }
  const tags = new Set((doc.hashtag_nodes as HashtagNode[]).map((h) => h.id));
  for (const link of doc.hashtag_links as HashtagLink[]) {
    if (!tags.has(link.source) || !tags.has(link.target)) {
      throw new SchemaError('hashtag link references a missing hashtag node');
    }
  }
  return doc as unknown as ExportDocument;
}
