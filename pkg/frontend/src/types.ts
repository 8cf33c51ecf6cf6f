// Shapes returned by the planttalk REST API.

export interface RegisterResponse {
  user_id: string;
  login_name: string;
  token: string;
}

export interface Species {
  species_id: string;
  display_name: string;
  persona: string;
}

export interface Plant {
  plant_id: string;
  species_id: string;
  nickname: string;
  created_at: number;
}

export interface Channel {
  channel_id: string;
  write_api_key: string;
  field_map: Record<string, string>;
}

export interface MetricFactor {
  value: number;
  score: number;
  lo: number;
  hi: number;
}

export interface Mood {
  label: string;
  comfort: number;
  factors: Record<string, MetricFactor>;
  as_of: number | null;
}

export interface Reading {
  ts: number;
  moisture_pct: number;
  temp_c: number;
  humidity_pct: number;
  seq: number;
}

export interface MetricStat {
  mean: number;
  min: number;
  max: number;
  count: number;
}

export interface AggregatePoint {
  window_start: number;
  window_len_s: number;
  stats: Record<string, MetricStat>;
}

export interface Dashboard {
  plant_id: string;
  latest: Reading | null;
  mood: Mood;
  aggregates: AggregatePoint[];
}

export interface Turn {
  role: "user" | "plant";
  text: string;
  ts: number;
}

export interface ChatReply {
  reply: string;
  mood: Mood;
  snapshot_ts: number | null;
}

export interface MoodAlert {
  plant_id: string;
  from_label: string;
  to_label: string;
  at: number;
  message: string;
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
